// Numeric-mode benchmark functions, mirroring the client library's built-ins.

export type NumericFunction = (xi: number[]) => number;

export const ISHIGAMI_A = 7.0;
export const ISHIGAMI_B = 0.1;
export const GFUNCTION_A = [0.0, 1.0, 4.5, 9.0];

/** sin(x1) + a*sin(x2)^2 + b*x3^4*sin(x1) on a length-3 input. */
export function ishigami(xi: number[], a: number = ISHIGAMI_A, b: number = ISHIGAMI_B): number {
  if (xi.length !== 3) {
    throw new Error(`ishigami expects 3 coordinates, got ${xi.length}`);
  }
  return Math.sin(xi[0]) + a * Math.sin(xi[1]) ** 2 + b * xi[2] ** 4 * Math.sin(xi[0]);
}

/** Sobol's g-function prod_i (|4*x_i - 2| + a_i) / (1 + a_i). */
export function gfunction(xi: number[], a: number[] = GFUNCTION_A): number {
  if (xi.length !== a.length) {
    throw new Error(`gfunction expects ${a.length} coordinates, got ${xi.length}`);
  }
  let product = 1.0;
  for (let i = 0; i < xi.length; i++) {
    product *= (Math.abs(4.0 * xi[i] - 2.0) + a[i]) / (1.0 + a[i]);
  }
  return product;
}

const registry = new Map<string, NumericFunction>([
  ["ishigami", (xi) => ishigami(xi)],
  ["gfunction", (xi) => gfunction(xi)],
]);

/**
 * Hook for serving a user-supplied function under `--function custom`.
 * Call this before `serve()` when embedding the runner as a library.
 */
export function registerCustomFunction(fn: NumericFunction): void {
  registry.set("custom", fn);
}

export function resolveFunction(name: string): NumericFunction {
  const fn = registry.get(name);
  if (fn === undefined) {
    const known = [...registry.keys()].sort().join(", ");
    throw new Error(`unknown numeric function '${name}' (known: ${known})`);
  }
  return fn;
}
