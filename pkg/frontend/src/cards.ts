/**
 * Collapsible card scaffold.
 *
 * Cards start collapsed and fetch nothing until opened; expansion is part
 * of the view state, so reopening a shared link restores the same cards.
 * Anything that goes wrong inside a card (an unsupported primitive, a
 * missing node) stays inside the card as an explicit notice instead of
 * taking the page down.
 */

import { ApiError, isAbort } from "./api";
import type { ExportResult } from "./api";
import { track } from "./async";
import type { Ctx } from "./context";
import { el, fill } from "./dom";
import { toggleItem } from "./state";

export interface CardSpec {
  /** Expansion token, unique per card, e.g. "card:c001:surrogate". */
  token: string;
  title: string;
  /** Produces the artifact for this card's export button, if it has one. */
  doExport?: () => Promise<ExportResult>;
  /** Fills the card body; runs only while the card is open. */
  render: (body: HTMLElement) => void | Promise<void>;
}

export function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.kind}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}

export function notice(text: string): HTMLElement {
  return el("p", { class: "notice", role: "status" }, text);
}

export function errorNotice(error: unknown): HTMLElement {
  return el("p", { class: "notice notice-error", role: "alert" }, describeError(error));
}

export function card(ctx: Ctx, spec: CardSpec): HTMLElement {
  const open = ctx.store.state.expanded.includes(spec.token);
  const body = el("div", { class: "card-body" });

  const toggle = el(
    "button",
    {
      class: "card-toggle",
      "data-token": spec.token,
      "aria-expanded": open ? "true" : "false",
      onclick: () =>
        ctx.store.update({ expanded: toggleItem(ctx.store.state.expanded, spec.token) }),
    },
    `${open ? "▾" : "▸"} ${spec.title}`,
  );

  const head = el("div", { class: "card-head" }, toggle);
  if (spec.doExport) {
    const status = el("span", { class: "export-status" });
    head.append(
      el(
        "button",
        {
          class: "card-export",
          "data-token": spec.token,
          onclick: () =>
            void track(
              (async () => {
                try {
                  const result = await spec.doExport!();
                  ctx.onExport(result);
                  status.textContent = result.filename;
                } catch (error) {
                  status.textContent = describeError(error);
                }
              })(),
            ),
        },
        "export",
      ),
      status,
    );
  }

  const root = el("section", { class: open ? "card open" : "card" }, head, body);
  if (open) {
    // render into a detached host and swap it in whole, so a card is never
    // shown half filled and an error replaces nothing but its own card
    const work = (async () => {
      fill(body, el("p", { class: "loading" }, "loading"));
      const host = el("div", { class: "card-content" });
      try {
        await spec.render(host);
        fill(body, host);
      } catch (error) {
        if (isAbort(error)) return;
        fill(body, errorNotice(error));
      }
    })();
    void track(work);
  }
  return root;
}
