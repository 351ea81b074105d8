/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const bob_state: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const fidelity_curves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const fitted_parameters: () => [number, number];
export const phase_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
