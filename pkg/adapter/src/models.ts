/**
 * Example forecasters served over the protocol.
 *
 * `persistence` is the trivial wrapper; `arForecaster` fits a small
 * autoregressive model to each window on the fly, so the server stays
 * stateless while still demonstrating a learned model.
 */

export type ModelFn = (windows: number[][]) => number[];

export const persistence: ModelFn = (windows) =>
  windows.map((window) => {
    if (window.length === 0) {
      throw new Error('cannot forecast an empty window');
    }
    return window[window.length - 1];
  });

/** Solve A x = b in place by Gaussian elimination with partial pivoting. */
function solve(matrix: number[][], rhs: number[]): number[] {
  const n = rhs.length;
  const a = matrix.map((row, i) => [...row, rhs[i]]);
  for (let col = 0; col < n; col++) {
    let pivot = col;
    for (let row = col + 1; row < n; row++) {
      if (Math.abs(a[row][col]) > Math.abs(a[pivot][col])) pivot = row;
    }
    if (Math.abs(a[pivot][col]) < 1e-12) {
      throw new Error('singular normal equations in AR fit');
    }
    [a[col], a[pivot]] = [a[pivot], a[col]];
    for (let row = col + 1; row < n; row++) {
      const factor = a[row][col] / a[col][col];
      for (let k = col; k <= n; k++) a[row][k] -= factor * a[col][k];
    }
  }
  const x = new Array<number>(n).fill(0);
  for (let row = n - 1; row >= 0; row--) {
    let acc = a[row][n];
    for (let k = row + 1; k < n; k++) acc -= a[row][k] * x[k];
    x[row] = acc / a[row][row];
  }
  return x;
}

/**
 * Per-window AR(order) forecaster with intercept, fitted by least squares
 * on the window's own lag pairs and evaluated one step ahead.
 */
export function arForecaster(order: number): ModelFn {
  if (!Number.isInteger(order) || order < 1) {
    throw new Error('AR order must be a positive integer');
  }
  return (windows) =>
    windows.map((window) => {
      const n = window.length;
      // order+1 unknowns need at least order+2 equations to be worth solving
      if (n < 2 * (order + 1)) {
        throw new Error(`window of ${n} samples is too short for AR(${order})`);
      }
      const dim = order + 1;
      const gram: number[][] = Array.from({ length: dim }, () => new Array<number>(dim).fill(0));
      const moment = new Array<number>(dim).fill(0);
      for (let t = order; t < n; t++) {
        const row = [1, ...Array.from({ length: order }, (_, k) => window[t - 1 - k])];
        for (let i = 0; i < dim; i++) {
          moment[i] += row[i] * window[t];
          for (let j = 0; j < dim; j++) gram[i][j] += row[i] * row[j];
        }
      }
      const coef = solve(gram, moment);
      let prediction = coef[0];
      for (let k = 0; k < order; k++) prediction += coef[k + 1] * window[n - 1 - k];
      return prediction;
    });
}
