/**
 * Entry point: pick a forecaster and serve it.
 *
 *   node dist/main.js                     persistence (default)
 *   node dist/main.js --model ar          per-window AR(3)
 *   node dist/main.js --model ar:5        per-window AR(5)
 */

import { arForecaster, ModelFn, persistence } from './models.js';
import { serve } from './serve.js';

function chooseModel(argv: string[]): ModelFn {
  const flag = argv.indexOf('--model');
  const name = flag >= 0 ? argv[flag + 1] : 'persistence';
  if (name === undefined) {
    throw new Error('--model needs a value: persistence | ar[:order]');
  }
  if (name === 'persistence') {
    return persistence;
  }
  if (name === 'ar' || name.startsWith('ar:')) {
    const order = name === 'ar' ? 3 : Number(name.slice(3));
    return arForecaster(order);
  }
  throw new Error(`unknown model ${JSON.stringify(name)}: use persistence | ar[:order]`);
}

try {
  serve(chooseModel(process.argv.slice(2)));
} catch (error) {
  process.stderr.write(`tsprism-adapter: ${error instanceof Error ? error.message : String(error)}\n`);
  process.exit(2);
}
