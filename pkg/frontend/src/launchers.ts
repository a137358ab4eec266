// Launcher grid: one tile per launcher, tap to launch.

import type { AppSummary } from "./api";

export function renderLaunchers(
  summary: AppSummary,
  onLaunch: (launcherId: string) => void,
): HTMLElement {
  const grid = document.createElement("div");
  grid.className = "launchers";
  if (summary.launchers.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "This app has no launchers yet.";
    grid.append(empty);
    return grid;
  }
  for (const launcher of summary.launchers) {
    const tile = document.createElement("button");
    tile.type = "button";
    tile.className = "tile";
    tile.dataset.launcher = launcher.id;
    if (launcher.icon) {
      const icon = document.createElement("img");
      icon.src = launcher.icon;
      icon.alt = "";
      tile.append(icon);
    }
    const label = document.createElement("span");
    label.textContent = launcher.label;
    tile.append(label);
    tile.addEventListener("click", () => onLaunch(launcher.id));
    grid.append(tile);
  }
  return grid;
}
