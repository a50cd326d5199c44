/** Browser bootstrap: same-origin API, DOM roots from index.html. */

import { ApiClient } from "./api.js";
import { App, type AppRoots } from "./app.js";
import { browserUrlAdapter } from "./urlstate.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id} in index.html`);
  }
  return node as T;
}

const roots: AppRoots = {
  form: byId<HTMLFormElement>("search-form"),
  input: byId<HTMLInputElement>("query"),
  status: byId("status"),
  banner: byId("banner"),
  results: byId("results"),
  domain: byId("domain"),
  history: byId("history"),
};

const app = new App(roots, new ApiClient(""), browserUrlAdapter(window));
void app.start();
