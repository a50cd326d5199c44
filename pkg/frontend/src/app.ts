/** Controller wiring the state machine, the API client, and the DOM.
 *
 * At most one search is treated as current: each submit bumps a
 * sequence number and responses carrying a stale number are discarded
 * by the state transitions. Domain inspection fetches carry their own
 * token with the same rule.
 */

import { ApiClient, ApiError, type ApiErrorKind } from "./api.js";
import {
  domainPane,
  errorBanner,
  historyChips,
  missingDomainNotice,
  noMatchNotice,
  patentList,
  resultsTable,
} from "./render.js";
import {
  domainClosed,
  domainSelected,
  initialState,
  refineQuery,
  searchDelivered,
  searchFailed,
  searchStarted,
  tabChanged,
  type SampleTab,
  type SearchViewState,
} from "./state.js";
import type { DomainDetail, SamplePayload } from "./types.js";
import type { UrlStateAdapter } from "./urlstate.js";

export interface AppRoots {
  form: HTMLFormElement;
  input: HTMLInputElement;
  status: HTMLElement;
  banner: HTMLElement;
  results: HTMLElement;
  domain: HTMLElement;
  history: HTMLElement;
}

interface DomainData {
  detail: DomainDetail;
  top: SamplePayload;
  random: SamplePayload;
}

const RESULT_LIMIT = 5;

export class App {
  private state: SearchViewState = initialState();
  private counter = 0;
  private detailToken = 0;
  private domainData: DomainData | null = null;

  constructor(
    private readonly roots: AppRoots,
    private readonly client: ApiClient,
    private readonly url: UrlStateAdapter,
  ) {}

  /** Bind events and restore the view encoded in the query string. */
  async start(): Promise<void> {
    this.roots.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    const params = this.url.read();
    if (params.tab === "random") {
      this.state = tabChanged(this.state, "random");
    }
    if (params.q !== null && params.q !== "") {
      this.roots.input.value = params.q;
      await this.submit();
      if (params.domain !== null && params.domain !== "") {
        await this.inspect(params.domain);
      }
    }
  }

  getState(): SearchViewState {
    return this.state;
  }

  async submit(): Promise<void> {
    const query = this.roots.input.value.trim();
    if (query === "") {
      return;
    }
    const seq = ++this.counter;
    this.state = searchStarted(this.state, query, seq);
    this.domainData = null;
    this.url.write({ q: query, domain: null });
    this.renderSearch();
    try {
      const payload = await this.client.search(query, RESULT_LIMIT);
      this.state = searchDelivered(
        this.state,
        seq,
        payload.results,
        payload.matched_patents,
      );
      if (seq === this.state.seq) {
        this.domainData = null;
      }
    } catch (err) {
      const { kind, message } = classify(err);
      this.state = searchFailed(this.state, seq, kind, message);
    }
    this.renderSearch();
  }

  async inspect(code: string): Promise<void> {
    this.state = domainSelected(this.state, code);
    this.url.write({ domain: code, tab: this.state.tab });
    const token = ++this.detailToken;
    this.roots.domain.replaceChildren();
    try {
      const detail = await this.client.domainDetail(code);
      const top = await this.client.samplePatents(code, "top");
      const random = await this.client.samplePatents(code, "random");
      if (token !== this.detailToken || this.state.selected !== code) {
        return;
      }
      this.domainData = { detail, top, random };
      this.renderDomain();
    } catch (err) {
      if (token !== this.detailToken || this.state.selected !== code) {
        return;
      }
      if (err instanceof ApiError && err.status === 404) {
        this.roots.domain.replaceChildren(missingDomainNotice(code));
      } else {
        const { kind, message } = classify(err);
        this.roots.domain.replaceChildren(
          errorBanner({ kind, message }, () => void this.inspect(code)),
        );
      }
    }
  }

  private async reseed(): Promise<void> {
    const data = this.domainData;
    if (data === null) {
      return;
    }
    const token = ++this.detailToken;
    const next = await this.client.samplePatents(
      data.detail.code,
      "random",
      data.random.seed + 1,
    );
    if (token !== this.detailToken || this.domainData !== data) {
      return;
    }
    this.domainData = { ...data, random: next };
    this.renderDomain();
  }

  private refine(token: string): void {
    this.roots.input.value = refineQuery(this.roots.input.value, token);
    this.roots.input.focus();
  }

  private setTab(tab: SampleTab): void {
    this.state = tabChanged(this.state, tab);
    this.url.write({ tab });
    this.renderDomain();
  }

  private closeDomain(): void {
    this.state = domainClosed(this.state);
    this.domainData = null;
    this.url.write({ domain: null });
    this.roots.domain.replaceChildren();
  }

  private renderSearch(): void {
    const state = this.state;
    this.roots.status.textContent = state.inFlight
      ? "searching..."
      : state.results !== null && state.error === null
        ? `${state.matchedPatents} patents matched`
        : "";

    if (state.error !== null) {
      this.roots.banner.replaceChildren(
        errorBanner(state.error, () => void this.submit()),
      );
    } else {
      this.roots.banner.replaceChildren();
    }

    if (state.results === null) {
      this.roots.results.replaceChildren();
    } else if (state.results.length === 0 && !state.inFlight) {
      this.roots.results.replaceChildren(noMatchNotice(state.query));
    } else {
      this.roots.results.replaceChildren(
        resultsTable(state.results, (code) => void this.inspect(code)),
      );
    }

    if (state.selected === null) {
      this.roots.domain.replaceChildren();
    }

    this.roots.history.replaceChildren(
      historyChips(state.history, (query) => {
        this.roots.input.value = query;
        void this.submit();
      }),
    );
  }

  private renderDomain(): void {
    const data = this.domainData;
    if (data === null || this.state.selected === null) {
      return;
    }
    const patents =
      this.state.tab === "top" ? data.top.patents : data.random.patents;
    const host = patentList(patents, (token) => this.refine(token));
    this.roots.domain.replaceChildren(
      domainPane(data.detail, this.state.tab, host, {
        onTab: (tab) => this.setTab(tab),
        onReseed: () => void this.reseed(),
        onClose: () => this.closeDomain(),
      }),
    );
  }
}

function classify(err: unknown): { kind: ApiErrorKind; message: string } {
  if (err instanceof ApiError) {
    return { kind: err.kind, message: err.message };
  }
  return {
    kind: "network",
    message: err instanceof Error ? err.message : String(err),
  };
}
