import { describe, expect, it } from 'vitest';

import { arForecaster, persistence } from '../src/models.js';

describe('persistence', () => {
  it('returns the last value of each window', () => {
    expect(persistence([[1, 2, 3], [7.5, -2]])).toEqual([3, -2]);
  });

  it('rejects empty windows', () => {
    expect(() => persistence([[]])).toThrow('empty window');
  });
});

describe('arForecaster', () => {
  it('recovers an exact linear recurrence', () => {
    // Fibonacci obeys x_t = x_{t-1} + x_{t-2}, so AR(2) must predict 13.
    const fib = [1, 1, 2, 3, 5, 8];
    const [prediction] = arForecaster(2)([fib]);
    expect(prediction).toBeCloseTo(13, 9);
  });

  it('recovers a damped recurrence with intercept', () => {
    // x_t = 2 + 0.5 x_{t-1}, started away from the fixed point 4.
    const series = [10];
    for (let i = 0; i < 11; i++) series.push(2 + 0.5 * series[i]);
    const [prediction] = arForecaster(1)([series]);
    expect(prediction).toBeCloseTo(2 + 0.5 * series[series.length - 1], 9);
  });

  it('rejects windows too short to fit', () => {
    expect(() => arForecaster(3)([[1, 2, 3, 4]])).toThrow('too short');
  });

  it('reports a singular fit on constant windows', () => {
    expect(() => arForecaster(2)([[5, 5, 5, 5, 5, 5, 5, 5]])).toThrow('singular');
  });

  it('rejects a non-positive order', () => {
    expect(() => arForecaster(0)).toThrow('positive integer');
  });
});
