import { defineConfig } from "vitest/config";

// Tests run against a live service started once in tests/setup/global.ts.
// The happy-dom page shares the service origin, mirroring how the vite dev
// proxy makes page and API same-origin in development.
export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      happyDOM: { url: "http://127.0.0.1:8361/" },
    },
    globalSetup: ["./tests/setup/global.ts"],
    fileParallelism: false,
    testTimeout: 30_000,
    hookTimeout: 120_000,
  },
});
