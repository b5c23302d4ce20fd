/**
 * Request loop: single-threaded, one request in flight, reply flushed per
 * line.  Protocol errors produce an error reply plus a stderr diagnostic
 * and a nonzero exit; `bye` exits 0.
 */

import { createInterface } from 'node:readline';

import type { ModelFn } from './models.js';
import { encodeReply, parseRequest, PROTOCOL_VERSION, ProtocolError, Reply } from './protocol.js';

export function serve(model: ModelFn): void {
  const rl = createInterface({ input: process.stdin, terminal: false });
  let inputLength: number | null = null;

  const reply = (message: Reply) => {
    process.stdout.write(encodeReply(message));
  };

  // Natural exit (never process.exit) so buffered stdout drains first.
  const shutdown = (code: number) => {
    process.exitCode = code;
    rl.close();
    process.stdin.destroy();
  };

  const fail = (message: string) => {
    reply({ type: 'error', message });
    process.stderr.write(`tsprism-adapter: ${message}\n`);
    shutdown(1);
  };

  rl.on('line', (line) => {
    let request;
    try {
      request = parseRequest(line);
    } catch (error) {
      fail(error instanceof ProtocolError ? error.message : String(error));
      return;
    }

    switch (request.type) {
      case 'hello': {
        if (inputLength !== null) {
          fail('duplicate hello');
          return;
        }
        if (request.protocol !== PROTOCOL_VERSION) {
          fail(`unsupported protocol version ${request.protocol}, expected ${PROTOCOL_VERSION}`);
          return;
        }
        inputLength = request.input_length;
        reply({ type: 'ready' });
        return;
      }
      case 'predict': {
        if (inputLength === null) {
          fail('predict before hello');
          return;
        }
        const expected = inputLength;
        const mismatched = request.windows.find((w) => w.length !== expected);
        if (mismatched !== undefined) {
          fail(`window of ${mismatched.length} samples does not match input_length ${expected}`);
          return;
        }
        let predictions: number[];
        try {
          predictions = model(request.windows);
        } catch (error) {
          fail(`model failed: ${error instanceof Error ? error.message : String(error)}`);
          return;
        }
        reply({ type: 'prediction', id: request.id, predictions });
        return;
      }
      case 'bye': {
        shutdown(0);
        return;
      }
    }
  });
}
