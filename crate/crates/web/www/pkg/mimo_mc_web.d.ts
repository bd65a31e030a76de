/* tslint:disable */
/* eslint-disable */

/**
 * Triples `(ξ, β_ξ(M), β_ξ)` for `n` values of `ξ` spread over `[xi_min, 1/2]`.
 */
export function beta_curve(m: number, xi_min: number, n: number): Float64Array;

/**
 * Triples `(M, measured μ, μ₀ bound)` for half-wavelength ULA pairs of size
 * `m_min..=m_max`. An infeasible bound is `NaN`.
 */
export function coherence_curve(angles_deg: Float64Array, m_min: number, m_max: number): Float64Array;

/**
 * Kernel `|φ(x, y)|²` on a `resolution × resolution` grid over `[−π, π]²`, row-major in `x`.
 * `size` is the ULA spacing, UCA radius or spiral growth rate, in meters.
 */
export function phi_surface(kind: string, count: number, size: number, wavelength: number, resolution: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly beta_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly coherence_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly phi_surface: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
