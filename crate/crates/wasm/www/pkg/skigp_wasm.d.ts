/* tslint:disable */
/* eslint-disable */

/**
 * Grid node positions used by [`interpolation_weights`].
 */
export function grid_nodes(lo: number, hi: number, m: number, scheme: string): Float64Array;

/**
 * Interpolation weights of the point `x` on an `m`-point grid spanning
 * `[lo, hi]`, as interleaved `(grid index, weight)` pairs.
 */
export function interpolation_weights(x: number, lo: number, hi: number, m: number, scheme: string): Float64Array;

/**
 * Mean absolute error between `K_SKI` and the exact RBF covariance for each
 * grid size in `ms`, on `n` sorted inputs drawn from `N(0, 25)`.
 */
export function reconstruction_errors(n: number, lengthscale: number, scheme: string, ms: Uint32Array, seed: bigint): Float64Array;

/**
 * SKI regression in 1D with an RBF kernel and cubic interpolation on an
 * `m`-point grid. Returns predictive means followed by variances, one of
 * each per entry of `test`.
 */
export function ski_regression(x: Float64Array, y: Float64Array, test: Float64Array, m: number, lengthscale: number, noise_variance: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly grid_nodes: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly interpolation_weights: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly reconstruction_errors: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
    readonly ski_regression: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
