import { describe, expect, it } from "vitest";

import { ProtocolError } from "../src/protocol.js";
import { ViewModel } from "../src/viewmodel.js";
import { makeState, openModel } from "./helpers.js";

describe("connection lifecycle", () => {
  it("is not ready until the socket opens and a state arrives", () => {
    const vm = new ViewModel();
    expect(vm.ready()).toBe(false);
    vm.markOpen();
    expect(vm.ready()).toBe(false);
    vm.apply(makeState());
    expect(vm.ready()).toBe(true);
    vm.markClosed();
    expect(vm.ready()).toBe(false);
  });
});

describe("frame application", () => {
  it("stores the last acknowledged state", () => {
    const vm = openModel(makeState({ tick: 4, focus: 3 }));
    expect(vm.focus()).toBe(3);
    expect(vm.state?.tick).toBe(4);
  });

  it("keeps state untouched on an error frame and records the message", () => {
    const vm = openModel(makeState({ tick: 2 }));
    const before = vm.state;
    vm.applyText('{"v":1,"type":"error","error":"malformed json"}');
    expect(vm.state).toBe(before);
    expect(vm.lastError).toBe("malformed json");
  });

  it("clears the error once a state frame lands", () => {
    const vm = openModel(makeState());
    vm.applyText('{"v":1,"type":"error","error":"malformed json"}');
    vm.apply(makeState({ tick: 1 }));
    expect(vm.lastError).toBeNull();
  });

  it("rejects frames from a different protocol version", () => {
    const vm = openModel();
    expect(() => vm.applyText('{"v":2,"type":"state"}')).toThrow(ProtocolError);
  });
});

describe("drag reconciliation", () => {
  it("renders focus from the server even mid-drag", () => {
    const vm = openModel(makeState({ focus: 5 }));
    vm.dragOffset = 0.9;
    expect(vm.focus()).toBe(5);
  });

  it("drops whole wedges from the offset when an ack arrives", () => {
    const vm = openModel(makeState());
    vm.dragOffset = 1.7;
    vm.apply(makeState({ tick: 1, focus: 1 }));
    expect(vm.dragOffset).toBeCloseTo(0.7, 12);
    vm.dragOffset = -1.3;
    vm.apply(makeState({ tick: 2, focus: 0 }));
    expect(vm.dragOffset).toBeCloseTo(-0.3, 12);
  });
});
