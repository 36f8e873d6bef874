import { defineConfig } from "vite";

// The dev server proxies API routes to a locally running
// `runlens serve` so the page and the API share an origin.
export default defineConfig({
  server: {
    port: 5173,
    proxy: {
      "/runs": "http://127.0.0.1:8300",
      "/export": "http://127.0.0.1:8300",
    },
  },
  build: {
    outDir: "dist",
  },
});
