import { StateFrame } from "../src/protocol.js";
import { ViewModel } from "../src/viewmodel.js";

export function makeState(overrides: Partial<StateFrame> = {}): StateFrame {
  return {
    v: 1,
    type: "state",
    tick: 0,
    phase: "running",
    focus: 0,
    focus_world_wedge: 0,
    fov_wedges: 2,
    indicator: null,
    intent: { decided: false, density: 0.125, wedge: null },
    panorama: Array.from({ length: 8 }, () => ({ value: 0, labels: [] })),
    map: {
      cell_size_m: 0.5,
      rows: ["#####", "#...#", "#...#", "#####"],
      robot: { row: 1, col: 1, heading: 0 },
    },
    ...overrides,
  };
}

export function openModel(state?: StateFrame): ViewModel {
  const vm = new ViewModel();
  vm.markOpen();
  if (state !== undefined) vm.apply(state);
  return vm;
}
