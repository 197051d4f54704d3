/* tslint:disable */
/* eslint-disable */

/**
 * Grid value of the Dubins reachable tube around the unit cylinder at heading `theta`,
 * sampled on an `n × n` raster of `[-10, 10]²`, rows from `y = -10` upward.
 */
export function dubins_brt_slice(theta: number, tau: number, n: number): Float64Array;

/**
 * Dubins states `[x, y, θ]` at every step of a constant turn rate `u` over `tau`.
 */
export function dubins_trajectory(x: number, y: number, theta: number, u: number, tau: number, steps: number): Float64Array;

/**
 * Labels `[-1, 1]²` around a disk of `radius` for the planar single integrator.
 * Returns `[cx, cy, r, unsafe]` per cell, flattened.
 */
export function verify_integrator_2d(radius: number, tau: number, r_min: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dubins_brt_slice: (a: number, b: number, c: number) => [number, number, number, number];
    readonly dubins_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly verify_integrator_2d: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
