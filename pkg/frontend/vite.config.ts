/// <reference types="vitest/config" />
import { defineConfig } from "vite";

export default defineConfig({
  server: {
    // Dev server proxies API traffic to a locally running `formulary serve`.
    proxy: {
      "/api": "http://127.0.0.1:8000",
      "/opensearch.xml": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
  },
});
