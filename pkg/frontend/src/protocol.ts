// Session wire protocol (proto_version 1): one JSON document per WebSocket
// text frame, mirroring the server-side schema. Units live in field names.

export const PROTO_VERSION = 1;

export interface Hello {
  type: 'hello';
  role: 'p1' | 'p2' | 'view';
  session: string;
  proto_version: number;
}

export interface InputMsg {
  type: 'input';
  seq: number;
  t_client_ms: number;
  handle_x_mm: number;
}

export interface Welcome {
  type: 'welcome';
  session: string;
  script_preview: Record<string, unknown>;
  proto_version: number;
}

export type PathPoint = [tOffsetMs: number, leftMm: number, rightMm: number];

export interface FrameMsg {
  type: 'frame';
  t_ms: number;
  cursor_x_mm: number;
  own_x_mm: number;
  color: 'green' | 'orange' | 'red';
  phase: 'body' | 'choice_pre' | 'choice_post' | 'merge';
  highlight: 'left' | 'right' | null;
  path_window: PathPoint[];
}

export interface ChoiceResult {
  type: 'choice_result';
  index: number;
  direction: 'left' | 'right' | null;
  performance: number;
}

export interface EndMsg {
  type: 'end';
  report_summary: Record<string, unknown>;
}

export interface ErrorMsg {
  type: 'error';
  message: string;
}

export type ServerMessage = Welcome | FrameMsg | ChoiceResult | EndMsg | ErrorMsg;
export type SessionMessage = Hello | InputMsg | ServerMessage;

export class ProtocolError extends Error {}

export function makeHello(role: Hello['role'], session: string): Hello {
  return { type: 'hello', role, session, proto_version: PROTO_VERSION };
}

export function makeInput(seq: number, tClientMs: number, handleXMm: number): InputMsg {
  return { type: 'input', seq, t_client_ms: tClientMs, handle_x_mm: handleXMm };
}

export function encodeMessage(msg: SessionMessage): string {
  return JSON.stringify(msg);
}

function need(obj: Record<string, unknown>, tag: string, field: string,
              kind: 'number' | 'string' | 'object'): unknown {
  const value = obj[field];
  if (value === undefined) {
    throw new ProtocolError(`${tag}: missing field '${field}'`);
  }
  if (kind === 'object') {
    if (typeof value !== 'object' || value === null) {
      throw new ProtocolError(`${tag}: field '${field}' has wrong type`);
    }
  } else if (typeof value !== kind) {
    throw new ProtocolError(`${tag}: field '${field}' has wrong type`);
  }
  return value;
}

const COLORS = new Set(['green', 'orange', 'red']);
const PHASES = new Set(['body', 'choice_pre', 'choice_post', 'merge']);

export function decodeMessage(text: string): SessionMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`not valid JSON: ${String(err)}`);
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new ProtocolError('message must be a JSON object');
  }
  const obj = raw as Record<string, unknown>;
  const tag = obj['type'];
  switch (tag) {
    case 'hello':
      return {
        type: 'hello',
        role: need(obj, 'hello', 'role', 'string') as Hello['role'],
        session: need(obj, 'hello', 'session', 'string') as string,
        proto_version: need(obj, 'hello', 'proto_version', 'number') as number,
      };
    case 'input':
      return {
        type: 'input',
        seq: need(obj, 'input', 'seq', 'number') as number,
        t_client_ms: need(obj, 'input', 't_client_ms', 'number') as number,
        handle_x_mm: need(obj, 'input', 'handle_x_mm', 'number') as number,
      };
    case 'welcome':
      return {
        type: 'welcome',
        session: need(obj, 'welcome', 'session', 'string') as string,
        script_preview: need(obj, 'welcome', 'script_preview', 'object') as Record<string, unknown>,
        proto_version: need(obj, 'welcome', 'proto_version', 'number') as number,
      };
    case 'frame': {
      const color = need(obj, 'frame', 'color', 'string') as string;
      const phase = need(obj, 'frame', 'phase', 'string') as string;
      if (!COLORS.has(color)) {
        throw new ProtocolError(`frame: field 'color' has wrong type`);
      }
      if (!PHASES.has(phase)) {
        throw new ProtocolError(`frame: field 'phase' has wrong type`);
      }
      const highlight = obj['highlight'];
      if (highlight !== null && highlight !== 'left' && highlight !== 'right') {
        throw new ProtocolError(`frame: field 'highlight' has wrong type`);
      }
      const windowRaw = need(obj, 'frame', 'path_window', 'object');
      if (!Array.isArray(windowRaw)) {
        throw new ProtocolError(`frame: field 'path_window' has wrong type`);
      }
      const window: PathPoint[] = windowRaw.map((p) => {
        if (!Array.isArray(p) || p.length !== 3 || p.some((v) => typeof v !== 'number')) {
          throw new ProtocolError(`frame: field 'path_window' has wrong shape`);
        }
        return [p[0], p[1], p[2]];
      });
      return {
        type: 'frame',
        t_ms: need(obj, 'frame', 't_ms', 'number') as number,
        cursor_x_mm: need(obj, 'frame', 'cursor_x_mm', 'number') as number,
        own_x_mm: need(obj, 'frame', 'own_x_mm', 'number') as number,
        color: color as FrameMsg['color'],
        phase: phase as FrameMsg['phase'],
        highlight: highlight as FrameMsg['highlight'],
        path_window: window,
      };
    }
    case 'choice_result': {
      const direction = obj['direction'];
      if (direction !== null && direction !== 'left' && direction !== 'right') {
        throw new ProtocolError(`choice_result: field 'direction' has wrong type`);
      }
      return {
        type: 'choice_result',
        index: need(obj, 'choice_result', 'index', 'number') as number,
        direction: direction as ChoiceResult['direction'],
        performance: need(obj, 'choice_result', 'performance', 'number') as number,
      };
    }
    case 'end':
      return {
        type: 'end',
        report_summary: need(obj, 'end', 'report_summary', 'object') as Record<string, unknown>,
      };
    case 'error':
      return { type: 'error', message: need(obj, 'error', 'message', 'string') as string };
    default:
      throw new ProtocolError(`unknown message type: ${String(tag)}`);
  }
}
