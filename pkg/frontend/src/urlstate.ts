/** Query-string persistence so a result view is shareable by URL. */

export interface UrlParams {
  q: string | null;
  domain: string | null;
  tab: string | null;
}

export interface UrlStateAdapter {
  read(): UrlParams;
  /** Merge the given keys into the query string; null removes a key. */
  write(next: Partial<Record<"q" | "domain" | "tab", string | null>>): void;
}

export function browserUrlAdapter(win: Window): UrlStateAdapter {
  return {
    read() {
      const params = new URLSearchParams(win.location.search);
      return {
        q: params.get("q"),
        domain: params.get("domain"),
        tab: params.get("tab"),
      };
    },
    write(next) {
      const params = new URLSearchParams(win.location.search);
      for (const key of ["q", "domain", "tab"] as const) {
        if (!(key in next)) {
          continue;
        }
        const value = next[key];
        if (value === null || value === undefined) {
          params.delete(key);
        } else {
          params.set(key, value);
        }
      }
      const query = params.toString();
      const url = win.location.pathname + (query === "" ? "" : `?${query}`);
      win.history.replaceState(null, "", url);
    },
  };
}

/** In-memory adapter for tests. */
export function memoryUrlAdapter(initial?: Partial<UrlParams>): UrlStateAdapter & {
  current: UrlParams;
} {
  const current: UrlParams = {
    q: initial?.q ?? null,
    domain: initial?.domain ?? null,
    tab: initial?.tab ?? null,
  };
  return {
    current,
    read() {
      return { ...current };
    },
    write(next) {
      for (const key of ["q", "domain", "tab"] as const) {
        if (key in next) {
          current[key] = next[key] ?? null;
        }
      }
    },
  };
}
