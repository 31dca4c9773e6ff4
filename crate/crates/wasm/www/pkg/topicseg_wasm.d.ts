/* tslint:disable */
/* eslint-disable */

/**
 * Boundary similarity, precision, recall, Pk and WindowDiff with the matched pairs.
 */
export function score(num_sentences: number, hyp: string, reference: string, n: number): string;

/**
 * Similarity series over hashed bag-of-words vectors and its troughs.
 */
export function troughs(text: string, threshold: number, window: number): string;

/**
 * Sentence list, overlapping windows, accept zones and enumerated prompt text.
 */
export function windowPlan(text: string, window_budget: number, overlap: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly score: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly troughs: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly windowPlan: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
