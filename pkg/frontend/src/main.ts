import { mountApp } from "./app.js";

// The service origin can be overridden with ?service=<url> for development
// against a non-default port.
const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "";

window.addEventListener("DOMContentLoaded", () => {
  mountApp(document, baseUrl);
});
