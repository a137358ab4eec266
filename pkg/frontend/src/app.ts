// App shell: launcher grid on top, the active iteration below. The
// version watcher refreshes the grid in place; a running iteration is
// pinned to its model version, so the stage is never touched by it.

import { Api, ApiError, type AppSummary, type StepOutcome } from "./api";
import { renderIteration, showFormError } from "./form";
import { renderLaunchers } from "./launchers";
import { SchemaMismatchError } from "./protocol";
import { watchVersion, type WatchHandle } from "./watch";

export class AppShell {
  readonly launcherPane = document.createElement("section");
  readonly stage = document.createElement("section");

  private readonly title = document.createElement("h1");
  private summary: AppSummary | null = null;
  private activeInstance: number | null = null;
  private watcher: WatchHandle | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: Api,
    private readonly appId: string,
  ) {
    this.launcherPane.className = "launcher-pane";
    this.stage.className = "stage";
    root.replaceChildren(this.title, this.launcherPane, this.stage);
  }

  async start(pollTimeoutMs?: number): Promise<void> {
    await this.refreshSummary();
    this.watcher = watchVersion(
      this.api,
      this.appId,
      this.summary?.version ?? 0,
      () => this.refreshSummary(),
      pollTimeoutMs,
    );
  }

  stop(): void {
    this.watcher?.stop();
  }

  async refreshSummary(): Promise<void> {
    let summary: AppSummary;
    try {
      summary = await this.api.fetchApp(this.appId);
    } catch (error) {
      this.renderRetryBanner(error);
      return;
    }
    this.summary = summary;
    this.title.textContent = summary.name;
    this.launcherPane.replaceChildren(
      renderLaunchers(summary, (id) => void this.launch(id)),
    );
  }

  async launch(launcherId: string): Promise<void> {
    let outcome: StepOutcome;
    try {
      outcome = await this.api.launch(this.appId, launcherId);
    } catch (error) {
      this.renderFailure(error);
      return;
    }
    this.handleOutcome(outcome);
  }

  private handleOutcome(outcome: StepOutcome): void {
    if (outcome.instanceId !== undefined) {
      this.activeInstance = outcome.instanceId;
    }
    if (outcome.request === undefined) {
      this.renderCompletion(outcome.status);
      return;
    }
    let form: HTMLFormElement;
    try {
      form = renderIteration(outcome.request, (entries) => {
        void this.submit(entries);
      });
    } catch (error) {
      if (error instanceof SchemaMismatchError) {
        this.renderSchemaCard(error);
        return;
      }
      throw error;
    }
    this.stage.replaceChildren(form);
  }

  private async submit(entries: Parameters<Api["respond"]>[1]): Promise<void> {
    const instance = this.activeInstance;
    if (instance === null) return;
    let outcome: StepOutcome;
    try {
      outcome = await this.api.respond(instance, entries);
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        const form = this.stage.querySelector<HTMLFormElement>("form.iteration");
        if (form) showFormError(form, error.detail);
        return;
      }
      if (error instanceof ApiError && error.status === 409) {
        this.renderExpired(error.detail);
        return;
      }
      this.renderFailure(error);
      return;
    }
    this.handleOutcome(outcome);
  }

  private backButton(): HTMLButtonElement {
    const back = document.createElement("button");
    back.type = "button";
    back.className = "back";
    back.textContent = "Back";
    back.addEventListener("click", () => {
      this.activeInstance = null;
      this.stage.replaceChildren();
    });
    return back;
  }

  private renderCompletion(status: string): void {
    this.activeInstance = null;
    const card = document.createElement("div");
    card.className = "done";
    const line = document.createElement("p");
    line.textContent = status;
    card.append(line, this.backButton());
    this.stage.replaceChildren(card);
  }

  private renderExpired(detail: string): void {
    this.activeInstance = null;
    const card = document.createElement("div");
    card.className = "expired";
    const line = document.createElement("p");
    line.textContent = `This session has expired: ${detail}`;
    card.append(line, this.backButton());
    this.stage.replaceChildren(card);
  }

  private renderSchemaCard(error: SchemaMismatchError): void {
    const card = document.createElement("div");
    card.className = "schema-error";
    const line = document.createElement("p");
    line.textContent = `The server sent something this client cannot render: ${error.message}`;
    const raw = document.createElement("pre");
    raw.textContent = JSON.stringify(error.payload, null, 2);
    card.append(line, raw, this.backButton());
    this.stage.replaceChildren(card);
  }

  private renderFailure(error: unknown): void {
    const banner = document.createElement("div");
    banner.className = "failure";
    const line = document.createElement("p");
    line.textContent = error instanceof Error ? error.message : String(error);
    banner.append(line, this.backButton());
    this.stage.replaceChildren(banner);
  }

  private renderRetryBanner(error: unknown): void {
    const banner = document.createElement("div");
    banner.className = "retry";
    const line = document.createElement("p");
    line.textContent =
      error instanceof Error ? error.message : "Could not reach the server.";
    const retry = document.createElement("button");
    retry.type = "button";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void this.refreshSummary());
    banner.append(line, retry);
    this.launcherPane.replaceChildren(banner);
  }
}

function renderAppPicker(root: HTMLElement): void {
  const form = document.createElement("form");
  form.className = "app-picker";
  const caption = document.createElement("label");
  caption.textContent = "App id:";
  const input = document.createElement("input");
  input.name = "app";
  input.type = "text";
  caption.append(input);
  const go = document.createElement("button");
  go.type = "submit";
  go.textContent = "Open";
  form.append(caption, go);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value) location.search = `?app=${encodeURIComponent(input.value)}`;
  });
  root.replaceChildren(form);
}

export async function boot(
  root: HTMLElement,
  appId?: string,
  api: Api = new Api(".."),
  pollTimeoutMs?: number,
): Promise<AppShell | null> {
  const resolved =
    appId ?? new URLSearchParams(location.search).get("app") ?? undefined;
  if (!resolved) {
    renderAppPicker(root);
    return null;
  }
  const shell = new AppShell(root, api, resolved);
  await shell.start(pollTimeoutMs);
  return shell;
}
