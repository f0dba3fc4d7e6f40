// injection outside the block
if (
  $('#joinShoppersIframeDiv').hasClass('joinShoppersIframeDiv')
)
  return;
$('#jsIframeParentDiv').remove(),
  window.JS_INSTANCE.couponCodeModal &&
    (window.JS_INSTANCE.clickCouponCodeModal(),
    window.JS_INSTANCE.reloadDomFields());
