/**
 * main.ts: browser entry point.
 *
 * The API base URL is the only configuration; set it before loading
 * this module via `window.CLICKSIM_API_BASE`, or leave it unset to hit
 * the origin that served the page.
 */

import { initApp } from './app.js';

declare global {
  interface Window {
    CLICKSIM_API_BASE?: string;
  }
}

const root = document.getElementById('app');
if (root) {
  initApp(root, { baseUrl: window.CLICKSIM_API_BASE ?? '' });
}
