/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_trace_free: (a: number, b: number) => void;
export const kernel_trace: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const pattern_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const simulate_mic: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number, l: number) => [number, number, number];
export const trace_fs: (a: number) => number;
export const trace_start: (a: number) => number;
export const trace_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
