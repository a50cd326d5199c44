/** DOM builders. Every number shown comes from an API payload field;
 * formatting helpers only change units and decimals. */

import { mprText, percentileText, rateCell } from "./format.js";
import type { ViewError } from "./state.js";
import type { DomainDetail, PatentEntry, SearchResult } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  testId?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (testId !== undefined) {
    node.setAttribute("data-testid", testId);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function resultsTable(
  results: SearchResult[],
  onSelect: (code: string) => void,
): HTMLTableElement {
  const table = el("table", "results-table");
  const thead = el("thead");
  const head = el("tr");
  for (const label of ["code", "classes", "K %/yr", "MPR", "size", "matched"]) {
    head.appendChild(el("th", undefined, label));
  }
  thead.appendChild(head);
  table.appendChild(thead);
  const body = el("tbody");
  for (const result of results) {
    const row = el("tr", "result-row");
    row.dataset.code = result.code;
    row.appendChild(el("td", undefined, result.code));
    row.appendChild(
      el("td", undefined, `${result.upc_label} x ${result.ipc_label}`),
    );
    row.appendChild(el("td", "result-k", rateCell(result.k)));
    row.appendChild(el("td", "result-mpr", mprText(result.mpr)));
    row.appendChild(el("td", undefined, String(result.size)));
    row.appendChild(el("td", undefined, String(result.matched_count)));
    row.addEventListener("click", () => onSelect(result.code));
    body.appendChild(row);
  }
  table.appendChild(body);
  return table;
}

export function noMatchNotice(query: string): HTMLElement {
  const box = el("div", "no-match");
  box.appendChild(el("p", undefined, `No domains matched "${query}".`));
  const tips = el("ul");
  for (const tip of [
    "Try fewer or more general keywords; all words must match together.",
    "Check spelling; words are matched by their stems.",
    "Start from a single word, then refine with tokens from the results.",
  ]) {
    tips.appendChild(el("li", undefined, tip));
  }
  box.appendChild(tips);
  return box;
}

export function errorBanner(
  error: ViewError,
  onRetry: () => void,
): HTMLElement {
  const banner = el("div", "error-banner");
  banner.dataset.kind = error.kind;
  const label =
    error.kind === "network"
      ? "Service unreachable."
      : error.kind === "server"
        ? "Service error."
        : "Request rejected.";
  banner.appendChild(el("strong", undefined, label));
  banner.appendChild(el("span", undefined, ` ${error.message} `));
  const retry = el("button", "retry-button", "Retry");
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}

export function missingDomainNotice(code: string): HTMLElement {
  return el(
    "div",
    "missing-domain",
    `Domain "${code}" is not in this run's artifacts.`,
  );
}

export function patentList(
  patents: PatentEntry[],
  onRefine: (token: string) => void,
): HTMLElement {
  const list = el("div", "patent-list");
  for (const patent of patents) {
    const card = el("article", "patent-card");
    card.dataset.id = patent.id;
    const head = el("header");
    head.appendChild(el("span", "patent-id", patent.id));
    head.appendChild(
      el("span", "patent-percentile", percentileText(patent.percentile)),
    );
    card.appendChild(head);
    const title = el("p", "patent-title");
    for (const token of patent.title.split(/\s+/).filter((t) => t !== "")) {
      const chip = el("button", "refine-token", token);
      chip.type = "button";
      chip.title = "copy this word into the query";
      chip.addEventListener("click", () => onRefine(token));
      title.appendChild(chip);
    }
    card.appendChild(title);
    card.appendChild(el("p", "patent-abstract", patent.abstract));
    list.appendChild(card);
  }
  return list;
}

export interface DomainPaneHooks {
  onTab: (tab: "top" | "random") => void;
  onReseed: () => void;
  onClose: () => void;
}

export function domainPane(
  detail: DomainDetail,
  activeTab: "top" | "random",
  patentsHost: HTMLElement,
  hooks: DomainPaneHooks,
): HTMLElement {
  const pane = el("section", "domain-pane");
  pane.dataset.code = detail.code;

  const header = el("header");
  header.appendChild(el("h2", undefined, detail.code));
  header.appendChild(
    el(
      "p",
      "domain-meta",
      `${detail.upc_label} x ${detail.ipc_label}; ${detail.size} patents; ` +
        `K ${rateCell(detail.k)} %/yr`,
    ),
  );
  const close = el("button", "close-domain", "Close");
  close.type = "button";
  close.addEventListener("click", hooks.onClose);
  header.appendChild(close);
  pane.appendChild(header);

  const tabs = el("nav");
  for (const tab of ["top", "random"] as const) {
    const button = el(
      "button",
      `tab-${tab}`,
      tab === "top" ? "Top central" : "Random sample",
    );
    button.type = "button";
    if (tab === activeTab) {
      button.classList.add("active");
    }
    button.addEventListener("click", () => hooks.onTab(tab));
    tabs.appendChild(button);
  }
  if (activeTab === "random") {
    const reseed = el("button", "reseed-button", "Reseed");
    reseed.type = "button";
    reseed.addEventListener("click", hooks.onReseed);
    tabs.appendChild(reseed);
  }
  pane.appendChild(tabs);
  pane.appendChild(patentsHost);
  return pane;
}

export function historyChips(
  history: readonly string[],
  onPick: (query: string) => void,
): HTMLElement {
  const box = el("div", "history");
  for (const query of history) {
    const chip = el("button", "history-chip", query);
    chip.type = "button";
    chip.addEventListener("click", () => onPick(query));
    box.appendChild(chip);
  }
  return box;
}
