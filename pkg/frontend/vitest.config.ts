import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // In production the UI is served by the API process under /ui/, so
    // requests are same-origin. Give the test window that origin too.
    environmentOptions: {
      happyDOM: { url: "http://127.0.0.1:8471" },
    },
    include: ["tests/**/*.test.ts"],
    // The e2e file drives a real pipeline run plus a live server and
    // owns a fixed port, so files run one at a time.
    fileParallelism: false,
    testTimeout: 60_000,
    hookTimeout: 180_000,
  },
});
