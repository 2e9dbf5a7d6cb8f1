/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_auto: (a: number, b: number, c: bigint) => number;
export const demo_fire: (a: number, b: number, c: bigint) => [number, number];
export const demo_new: (a: number, b: number) => [number, number, number];
export const demo_state: (a: number) => [number, number];
export const demo_steps: (a: number) => [number, number];
export const demo_trace: (a: number) => [number, number];
export const demo_undo: (a: number) => [number, number];
export const demo_version: (a: number) => bigint;
export const scenarios: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
