/** What every view gets handed: the client, the store, and app services. */

import type { Client, ExportResult, RequestLane } from "./api";
import type { Store } from "./state";

export interface Ctx {
  client: Client;
  lane: RequestLane;
  store: Store;
  /** Receives finished exports; the default hands them to the browser. */
  onExport: (result: ExportResult) => void;
  /** Current metric terminology: clinical audiences prefer "sensitivity". */
  terminology: () => "recall" | "sensitivity";
}
