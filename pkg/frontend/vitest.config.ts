import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // same origin as the contract-test service, so fetch skips CORS preflight
    environmentOptions: {
      happyDOM: { url: "http://127.0.0.1:8977" },
    },
    include: ["tests/**/*.test.ts"],
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
