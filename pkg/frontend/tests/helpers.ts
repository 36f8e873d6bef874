/** Shared plumbing for driving the app inside happy-dom against the live service. */

import { inject } from "vitest";
import { Client } from "../src/api";
import type { ExportResult } from "../src/api";
import { initApp } from "../src/app";
import type { AppHandle } from "../src/app";
import { whenIdle } from "../src/async";

export function apiBase(): string {
  return inject("apiBase");
}

/** A second, independent client for fetching expected values. */
export function oracle(): Client {
  return new Client(apiBase());
}

export interface TestApp {
  root: HTMLElement;
  handle: AppHandle;
  exports: ExportResult[];
}

export async function freshApp(search = ""): Promise<TestApp> {
  window.localStorage.clear();
  window.history.replaceState(null, "", search ? `/?${search}` : "/");
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  const exports: ExportResult[] = [];
  const handle = await initApp(root, {
    client: new Client(apiBase()),
    onExport: (result) => exports.push(result),
  });
  await whenIdle();
  return { root, handle, exports };
}

export function q<T extends Element = HTMLElement>(root: ParentNode, selector: string): T {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`missing element: ${selector}`);
  return node as T;
}

export function maybe(root: ParentNode, selector: string): Element | null {
  return root.querySelector(selector);
}

export function text(root: ParentNode, selector: string): string {
  return (q(root, selector).textContent ?? "").trim();
}

export async function click(node: Element): Promise<void> {
  node.dispatchEvent(new window.MouseEvent("click", { bubbles: true }));
  await whenIdle();
}

export async function setValue(
  input: HTMLInputElement | HTMLSelectElement,
  value: string,
): Promise<void> {
  input.value = value;
  input.dispatchEvent(new window.Event("change", { bubbles: true }));
  await whenIdle();
}

export async function setChecked(input: HTMLInputElement, on: boolean): Promise<void> {
  input.checked = on;
  input.dispatchEvent(new window.Event("change", { bubbles: true }));
  await whenIdle();
}

export async function openCard(root: ParentNode, token: string): Promise<void> {
  await click(q(root, `button.card-toggle[data-token="${token}"]`));
}
