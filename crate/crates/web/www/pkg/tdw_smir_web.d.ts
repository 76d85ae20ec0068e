/* tslint:disable */
/* eslint-disable */

/**
 * A sampled signal starting at sample index `start`.
 */
export class Trace {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly fs: number;
    readonly start: number;
    readonly values: Float64Array;
}

/**
 * Zonal (m = u = 0) wavefront kernel between source degree `v` and
 * observed degree `n`.
 */
export function kernel_trace(radius: number, distance: number, n: number, v: number, fs: number): Trace;

/**
 * Pattern gain over `points` polar angles from 0 to π.
 */
export function pattern_curve(kind: string, order: number, points: number): Float64Array;

/**
 * Impulse response at one capsule of the 32-capsule array, uniform wall
 * reflection coefficient `beta`.
 */
export function simulate_mic(dims: Float64Array, beta: number, source: Float64Array, center: Float64Array, pattern: string, images: number, order: number, mic: number): Trace;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_trace_free: (a: number, b: number) => void;
    readonly kernel_trace: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly pattern_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulate_mic: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number, l: number) => [number, number, number];
    readonly trace_fs: (a: number) => number;
    readonly trace_start: (a: number) => number;
    readonly trace_values: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
