/** Browser entry point: resolve the service URL and mount the app. */

import { ServiceClient } from "./client.js";
import { mountChatApp } from "./app.js";

declare global {
  interface Window {
    ARGUDIALOG_SERVICE?: string;
  }
}

function serviceUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  if (fromQuery) return fromQuery;
  if (window.ARGUDIALOG_SERVICE) return window.ARGUDIALOG_SERVICE;
  return window.location.origin;
}

const root = document.getElementById("app");
if (root) {
  mountChatApp(root, new ServiceClient(serviceUrl()));
}
