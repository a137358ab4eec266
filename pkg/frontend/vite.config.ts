/// <reference types="vitest/config" />
import { defineConfig } from "vite";

// base is relative because the server mounts the built bundle at /ui.
export default defineConfig({
  base: "./",
  build: { outDir: "dist" },
  test: { environment: "happy-dom" },
});
