// Line-delimited JSON wire protocol shared with the Python adapter.
//
// Request:  {"id": <int>, "xi": [<float>, ...]}   (numeric mode)
//           {"id": <int>, "path": "<file.png>"}   (image mode)
// Response: {"id": <int>, "y": <float>}           (numeric mode)
//           {"id": <int>, "probs": [<float>, ...]}(image mode)
//           {"id": <int>|null, "error": "<msg>"}  (either mode)

export interface EvalRequest {
  id: number;
  xi?: number[];
  path?: string;
}

export interface NumericResponse {
  id: number;
  y: number;
}

export interface ProbsResponse {
  id: number;
  probs: number[];
}

export interface ErrorResponse {
  id: number | null;
  error: string;
}

export type EvalResponse = NumericResponse | ProbsResponse | ErrorResponse;

/** Raised for requests that cannot be served; carries the id when one was readable. */
export class RequestError extends Error {
  readonly id: number | null;

  constructor(message: string, id: number | null = null) {
    super(message);
    this.id = id;
  }
}

function readableId(value: unknown): number | null {
  return typeof value === "number" && Number.isInteger(value) ? value : null;
}

/** Parse one request line, validating shape for the given mode. */
export function parseRequest(line: string, mode: "numeric" | "image"): EvalRequest {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new RequestError(`request is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new RequestError("request must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const id = readableId(obj.id);
  if (id === null) {
    throw new RequestError("request id must be an integer");
  }
  if (mode === "numeric") {
    const xi = obj.xi;
    if (!Array.isArray(xi) || xi.length === 0 || !xi.every((v) => typeof v === "number" && Number.isFinite(v))) {
      throw new RequestError("numeric request needs 'xi': non-empty array of finite numbers", id);
    }
    return { id, xi: xi as number[] };
  }
  const path = obj.path;
  if (typeof path !== "string" || path.length === 0) {
    throw new RequestError("image request needs 'path': non-empty string", id);
  }
  return { id, path };
}

export function serializeResponse(response: EvalResponse | Record<string, unknown>): string {
  return JSON.stringify(response) + "\n";
}
