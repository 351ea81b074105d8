/* tslint:disable */
/* eslint-disable */

export function bob_state(alpha_abs: number, alpha_phase: number, eta_one: number, eta_spd: number, eta_hd: number, mode_match: number): Float64Array;

export function fidelity_curves(eta_one: number, eta_spd: number, eta_hd: number, mode_match: number, alpha_max: number, points: number): Float64Array;

/**
 * Fitted defaults as `[eta_one, eta_spd, eta_hd, mode_match]`.
 */
export function fitted_parameters(): Float64Array;

export function phase_map(alpha: number, eta_one: number, eta_spd: number, eta_hd: number, mode_match: number, phi_steps: number, bins: number, half_width: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bob_state: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly fidelity_curves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly fitted_parameters: () => [number, number];
    readonly phase_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
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
