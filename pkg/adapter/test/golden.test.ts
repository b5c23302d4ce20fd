import { spawn } from 'node:child_process';
import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';
import { expect, it } from 'vitest';

const MAIN = fileURLToPath(new URL('../dist/main.js', import.meta.url));
const INPUT = fileURLToPath(new URL('./fixtures/golden_session.input', import.meta.url));
const OUTPUT = fileURLToPath(new URL('./fixtures/golden_session.output', import.meta.url));

// If this test breaks, the wire format changed; that is a compatibility
// break for every client, not a fixture to regenerate casually.
it('replays the golden session byte for byte', async () => {
  const recorded = readFileSync(OUTPUT);
  const actual = await new Promise<Buffer>((resolve, reject) => {
    const child = spawn(process.execPath, [MAIN], { stdio: ['pipe', 'pipe', 'inherit'] });
    const chunks: Buffer[] = [];
    child.stdout.on('data', (chunk) => chunks.push(chunk));
    child.on('error', reject);
    child.on('close', (code) => {
      if (code !== 0) reject(new Error(`exit code ${code}`));
      else resolve(Buffer.concat(chunks));
    });
    child.stdin.write(readFileSync(INPUT));
    child.stdin.end();
  });
  expect(actual.equals(recorded)).toBe(true);
});
