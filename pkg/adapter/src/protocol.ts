/**
 * Message types and validation for the line-delimited JSON model protocol.
 *
 * The parent speaks first:
 *
 *   -> {"type": "hello", "protocol": 1, "input_length": 168}
 *   <- {"type": "ready"}
 *   -> {"type": "predict", "id": 1, "windows": [[...], ...]}
 *   <- {"type": "prediction", "id": 1, "predictions": [...]}
 *   -> {"type": "bye"}              (server exits 0)
 *
 * Every reply is a single line flushed immediately.  Anything the server
 * cannot parse or accept is answered with an error reply and a nonzero exit.
 */

export const PROTOCOL_VERSION = 1;

export interface HelloRequest {
  type: 'hello';
  protocol: number;
  input_length: number;
}

export interface PredictRequest {
  type: 'predict';
  id: number;
  windows: number[][];
}

export interface ByeRequest {
  type: 'bye';
}

export type Request = HelloRequest | PredictRequest | ByeRequest;

export interface ReadyReply {
  type: 'ready';
}

export interface PredictionReply {
  type: 'prediction';
  id: number;
  predictions: number[];
}

export interface ErrorReply {
  type: 'error';
  message: string;
}

export type Reply = ReadyReply | PredictionReply | ErrorReply;

/** Raised for any line that is not a well-formed request. */
export class ProtocolError extends Error {}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

function isFiniteNumber(value: unknown): value is number {
  return typeof value === 'number' && Number.isFinite(value);
}

export function parseRequest(line: string): Request {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new ProtocolError('request is not valid JSON');
  }
  if (!isRecord(raw)) {
    throw new ProtocolError('request is not a JSON object');
  }
  switch (raw.type) {
    case 'hello': {
      if (!isFiniteNumber(raw.protocol)) {
        throw new ProtocolError('hello is missing a numeric protocol field');
      }
      if (!Number.isInteger(raw.input_length) || (raw.input_length as number) < 1) {
        throw new ProtocolError('hello is missing a positive input_length');
      }
      return { type: 'hello', protocol: raw.protocol, input_length: raw.input_length as number };
    }
    case 'predict': {
      if (!Number.isInteger(raw.id)) {
        throw new ProtocolError('predict is missing an integer id');
      }
      const windows = raw.windows;
      if (!Array.isArray(windows) || windows.length === 0) {
        throw new ProtocolError('predict carries no windows');
      }
      for (const window of windows) {
        if (!Array.isArray(window) || !window.every(isFiniteNumber)) {
          throw new ProtocolError('every window must be an array of finite numbers');
        }
      }
      return { type: 'predict', id: raw.id as number, windows: windows as number[][] };
    }
    case 'bye':
      return { type: 'bye' };
    default:
      throw new ProtocolError(`unknown request type ${JSON.stringify(raw.type)}`);
  }
}

export function encodeReply(reply: Reply): string {
  return JSON.stringify(reply) + '\n';
}
