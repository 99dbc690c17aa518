/**
 * DOM wiring for the ceremony dashboard. All protocol logic lives in
 * the other modules; this file renders state and forwards intents, so
 * the interesting behavior stays testable without a browser.
 */

import { randomMask, toHex } from "./bytes.js";
import { ApiClient, ServiceError } from "./client.js";
import { commitDigestHex } from "./encoding.js";
import { SecretStore } from "./secrets.js";
import { allOk, verdictText, verifyTranscript, type VerificationReport } from "./verify.js";
import { Ingest, type CeremonyView } from "./viewmodel.js";

export interface PageParams {
  session?: string;
  stakeholder?: string;
  token?: string;
}

/** Parse "#session=x&stakeholder=y&token=z" invite fragments. */
export function parseFragment(hash: string): PageParams {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  const out: PageParams = {};
  const session = params.get("session");
  const stakeholder = params.get("stakeholder");
  const token = params.get("token");
  if (session !== null) out.session = session;
  if (stakeholder !== null) out.stakeholder = stakeholder;
  if (token !== null) out.token = token;
  return out;
}

export function inviteLink(
  baseHref: string,
  sessionId: string,
  stakeholderId: string,
  token: string,
): string {
  const params = new URLSearchParams({
    session: sessionId,
    stakeholder: stakeholderId,
    token,
  });
  return `${baseHref}#${params.toString()}`;
}

/**
 * Client-side value validation; runs before anything touches the
 * network so out-of-range input never even forms a request.
 */
export function validateValue(raw: string, modulus: bigint): { value: bigint } | { error: string } {
  if (!/^[0-9]+$/.test(raw.trim())) return { error: "enter a whole number" };
  const value = BigInt(raw.trim());
  if (value >= modulus) return { error: `must be below ${modulus}` };
  return { value };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export interface AppDeps {
  client: ApiClient;
  secrets: SecretStore;
  params: PageParams;
  baseHref?: string;
}

export class App {
  readonly root: HTMLElement;
  private readonly deps: AppDeps;
  private view: CeremonyView | null = null;
  private committed = false;
  private revealed = false;
  private streamAbort: AbortController | null = null;

  constructor(root: HTMLElement, deps: AppDeps) {
    this.root = root;
    this.deps = deps;
  }

  async start(): Promise<void> {
    if (this.deps.params.session === undefined) {
      this.renderConfigure();
      return;
    }
    await this.openCeremony(this.deps.params.session);
  }

  stop(): void {
    this.streamAbort?.abort();
  }

  // -- configure -----------------------------------------------------------

  private renderConfigure(): void {
    this.root.replaceChildren();
    const form = el("form", { id: "configure" });
    form.append(
      el("h1", {}, "Set up a draw"),
      labelled("session id", el("input", { name: "session", required: "" })),
      labelled("modulus", el("input", { name: "modulus", inputmode: "numeric" })),
      labelled("stakeholders (comma separated)", el("input", { name: "roster" })),
      labelled("description", el("input", { name: "metadata" })),
      el("button", { type: "submit" }, "create ceremony"),
      el("p", { id: "configure-error", class: "error", role: "alert" }),
    );
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submitConfigure(form);
    });
    this.root.append(form);
  }

  private async submitConfigure(form: HTMLFormElement): Promise<void> {
    const data = new FormData(form);
    const errorOut = form.querySelector("#configure-error")!;
    const roster = String(data.get("roster") ?? "")
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
    const modulusRaw = String(data.get("modulus") ?? "").trim();
    if (roster.length === 0) {
      errorOut.textContent = "at least one stakeholder is required";
      return;
    }
    if (!/^[0-9]+$/.test(modulusRaw) || BigInt(modulusRaw) < 2n) {
      errorOut.textContent = "modulus must be an integer of at least 2";
      return;
    }
    try {
      const created = await this.deps.client.createCeremony({
        session_id: String(data.get("session") ?? ""),
        modulus: Number(modulusRaw),
        roster,
        metadata: String(data.get("metadata") ?? ""),
      });
      this.renderInvites(created.session_id, created.tokens);
    } catch (exc) {
      errorOut.textContent = exc instanceof ServiceError ? exc.detail : String(exc);
    }
  }

  private renderInvites(sessionId: string, tokens: Record<string, string>): void {
    this.root.replaceChildren();
    const base = this.deps.baseHref ?? "";
    const list = el("ul", { id: "invites" });
    for (const [sid, token] of Object.entries(tokens)) {
      const item = el("li");
      const link = el("a", { href: inviteLink(base, sessionId, sid, token) }, sid);
      item.append(link);
      list.append(item);
    }
    this.root.append(
      el("h1", {}, `ceremony ${sessionId} created`),
      el("p", {}, "send each stakeholder their private link, then close this page:"),
      list,
    );
  }

  // -- ceremony page -------------------------------------------------------

  private async openCeremony(sessionId: string): Promise<void> {
    this.root.replaceChildren(
      el("h1", { id: "title" }, `ceremony ${sessionId}`),
      el("p", { id: "phase" }),
      el("p", { id: "metadata" }),
      el("ul", { id: "roster" }),
      el("p", { id: "partial" }),
      el("p", { id: "outcome" }),
      el("section", { id: "panel" }),
      el("section", { id: "verify" }),
      el("ol", { id: "log" }),
      el("p", { id: "app-error", class: "error", role: "alert" }),
    );
    const verifySection = this.root.querySelector("#verify")!;
    const verifyButton = el("button", { id: "verify-button" }, "verify transcript");
    verifyButton.addEventListener("click", () => void this.runVerify());
    verifySection.append(verifyButton, el("div", { id: "verdict" }));

    // rehydrate: snapshot tells us where we are, the stream catches us up
    const snapshot = await this.deps.client.state(sessionId);
    const ingest = new Ingest((view) => {
      this.view = view;
      this.renderState(view);
    });
    this.streamAbort = new AbortController();
    const follow = async () => {
      try {
        for await (const record of this.deps.client.events(
          sessionId,
          0,
          this.streamAbort!.signal,
        )) {
          ingest.feed(record);
        }
      } catch (exc) {
        if (!this.streamAbort?.signal.aborted) this.showError(String(exc));
      }
    };
    void follow();
    // until the replay arrives, show the snapshot's phase
    this.root.querySelector("#phase")!.textContent = `phase: ${snapshot.phase}`;
  }

  private renderState(view: CeremonyView): void {
    const q = (sel: string) => this.root.querySelector(sel)!;
    q("#phase").textContent = `phase: ${view.phase}`;
    q("#metadata").textContent = view.metadata;
    const roster = q("#roster");
    roster.replaceChildren(
      ...view.roster.map((s) => {
        const item = el("li", { "data-stakeholder": s.id, "data-badge": s.badge });
        item.append(
          el("span", { class: "sid" }, s.id),
          el("span", { class: `badge badge-${s.badge}` }, s.badge),
          el(
            "span",
            { class: "detail" },
            s.value !== null
              ? `revealed ${s.value}`
              : s.digestHex !== null
                ? `${s.digestHex.slice(0, 16)}...`
                : "",
          ),
        );
        return item;
      }),
    );
    q("#partial").textContent =
      view.partialSum !== null && view.phase !== "complete"
        ? `partial sum of ${view.revealedCount} reveals: ${view.partialSum}`
        : "";
    q("#outcome").textContent =
      view.phase === "complete" && view.outcome !== null
        ? `outcome: ${view.outcome}` +
          (view.selectedCandidate !== null ? ` -> ${view.selectedCandidate}` : "")
        : view.phase === "aborted"
          ? `aborted: ${view.abortReason ?? ""}`
          : "";
    const log = q("#log");
    log.replaceChildren(...view.log.map((line) => el("li", {}, line)));
    this.renderPanel(view);
  }

  private renderPanel(view: CeremonyView): void {
    const panel = this.root.querySelector("#panel")!;
    const { stakeholder, token, session } = this.deps.params;
    if (stakeholder === undefined || token === undefined || session === undefined) {
      panel.replaceChildren(el("p", {}, "observing (no stakeholder link)"));
      return;
    }
    const me = view.roster.find((s) => s.id === stakeholder);
    const secret = this.deps.secrets.load(session, stakeholder);

    if (view.phase === "commit") {
      if (me?.digestHex !== null || this.committed) {
        panel.replaceChildren(
          el("p", { id: "locked" }, "your commitment is locked in; waiting for the others"),
        );
        return;
      }
      this.renderCommitPanel(panel, view, session, stakeholder, token);
      return;
    }
    if (view.phase === "reveal") {
      if (me?.value !== null || this.revealed) {
        panel.replaceChildren(el("p", {}, "revealed; waiting for the others"));
        return;
      }
      if (secret === null) {
        panel.replaceChildren(
          el("p", { class: "error" }, "no local secret for this ceremony in this browser"),
        );
        return;
      }
      const button = el("button", { id: "reveal-button" }, `reveal ${secret.value}`);
      button.addEventListener("click", () => {
        void this.submitReveal(session, stakeholder, token, secret.value, toHex(secret.mask));
      });
      panel.replaceChildren(button, el("p", { id: "panel-error", class: "error" }));
      return;
    }
    panel.replaceChildren();
  }

  private renderCommitPanel(
    panel: Element,
    view: CeremonyView,
    session: string,
    stakeholder: string,
    token: string,
  ): void {
    if (panel.querySelector("#commit-form") !== null) return; // keep input state
    const form = el("form", { id: "commit-form" });
    const input = el("input", {
      id: "value-input",
      name: "value",
      inputmode: "numeric",
      autocomplete: "off",
    });
    const dice = el("div", { id: "dice" });
    for (let d = 0; d <= 9; d++) {
      const key = el("button", { type: "button", class: "die" }, String(d));
      key.addEventListener("click", () => {
        input.value += String(d);
      });
      dice.append(key);
    }
    const error = el("p", { id: "panel-error", class: "error", role: "alert" });
    const submit = el("button", { type: "submit" }, "commit");
    form.append(
      el("label", {}, `your number (0 to ${view.modulus - 1n})`),
      input,
      dice,
      submit,
      error,
    );
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const checked = validateValue(input.value, view.modulus);
      if ("error" in checked) {
        error.textContent = checked.error;
        return;
      }
      void this.submitCommit(session, stakeholder, token, checked.value, view.modulus, error);
    });
    panel.replaceChildren(form);
  }

  private async submitCommit(
    session: string,
    stakeholder: string,
    token: string,
    value: bigint,
    modulus: bigint,
    errorOut: Element,
  ): Promise<void> {
    try {
      const mask = randomMask();
      const digestHex = await commitDigestHex(session, stakeholder, value, modulus, mask);
      // store before sending: a crash after the POST must not lose the opening
      this.deps.secrets.save({ sessionId: session, stakeholderId: stakeholder, value, mask, digestHex });
      await this.deps.client.submitCommitment(session, token, digestHex, stakeholder);
      this.committed = true;
      if (this.view !== null) this.renderPanel(this.view);
    } catch (exc) {
      if (exc instanceof ServiceError) this.deps.secrets.clear(session, stakeholder);
      errorOut.textContent = exc instanceof ServiceError ? exc.detail : String(exc);
    }
  }

  private async submitReveal(
    session: string,
    stakeholder: string,
    token: string,
    value: bigint,
    maskHex: string,
  ): Promise<void> {
    const errorOut = this.root.querySelector("#panel-error");
    try {
      await this.deps.client.submitReveal(session, token, value, maskHex, stakeholder);
      this.revealed = true;
      if (this.view !== null) this.renderPanel(this.view);
    } catch (exc) {
      if (exc instanceof ServiceError && errorOut !== null) {
        errorOut.textContent =
          exc.code === "phase_violation"
            ? `${exc.detail} (reveals stay sealed until every commitment is in; opening early would leak your number)`
            : exc.detail;
      } else if (errorOut !== null) {
        errorOut.textContent = String(exc);
      }
    }
  }

  // -- verification --------------------------------------------------------

  async runVerify(): Promise<VerificationReport | null> {
    const session = this.deps.params.session!;
    const verdict = this.root.querySelector("#verdict")!;
    verdict.replaceChildren(el("p", {}, "verifying..."));
    let data: Uint8Array;
    try {
      const fetched = await this.deps.client.transcript(session);
      data = fetched.data;
      if (fetched.corruption !== null) {
        this.showError(`service flags this transcript as corrupt: ${fetched.corruption}`);
      }
    } catch (exc) {
      const retry = el("button", { id: "verify-retry" }, "retry");
      retry.addEventListener("click", () => void this.runVerify());
      verdict.replaceChildren(el("p", { class: "error" }, `could not fetch transcript: ${exc}`), retry);
      return null;
    }
    const report = await verifyTranscript(data);
    const badge = el(
      "p",
      { id: "verdict-badge", class: allOk(report) ? "ok" : "bad" },
      verdictText(report),
    );
    const findings = el("ul", { id: "findings" });
    for (const f of report.findings) {
      findings.append(el("li", {}, `seq ${f.seq}: ${f.detail}`));
    }
    verdict.replaceChildren(badge, findings);
    return report;
  }

  private showError(message: string): void {
    const out = this.root.querySelector("#app-error");
    if (out !== null) out.textContent = message;
  }
}

function labelled(text: string, input: HTMLElement): HTMLElement {
  const wrap = el("label");
  wrap.append(text, input);
  return wrap;
}

/** Browser entry point. */
export function main(): void {
  const root = document.getElementById("app");
  if (root === null) return;
  const params = parseFragment(location.hash);
  const client = new ApiClient(location.origin);
  const app = new App(root, {
    client,
    secrets: new SecretStore(sessionStorage),
    params,
    baseHref: location.pathname,
  });
  void app.start();
}
