var tracked = window.__mtm_seen || false;
if (!tracked) {
  var img = document.createElement('img');
  img.src = 'https://matomo.debank.com/matomo.php?idsite=1&rec=1';
  document.body.appendChild(img);
  window.__mtm_seen = true;
}
