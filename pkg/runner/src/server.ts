// Reference evaluator server: JSON requests in on stdin, one JSON response
// per line out on stdout.  Responses keep request order unless the
// --shuffle test flag is set (then they are emitted in reversed blocks of
// SHUFFLE_BLOCK, so clients must tolerate reordering within their in-flight
// window).

import * as readline from "node:readline";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { ImageModel, SyntheticClassifier, readPng } from "./classifier.js";
import { NumericFunction, resolveFunction } from "./functions.js";
import { EvalResponse, RequestError, parseRequest, serializeResponse } from "./protocol.js";

export const SHUFFLE_BLOCK = 4;

export interface RunnerSpec {
  mode: "numeric" | "image";
  functionName: string;
  weights: [number, number];
  temperature: number;
  shuffle: boolean;
  /** Test hook: emit a deliberately malformed response for this request id. */
  corruptId: number | null;
}

export function parseCliArgs(argv: string[]): RunnerSpec {
  const { values } = parseArgs({
    args: argv,
    options: {
      mode: { type: "string", default: "numeric" },
      function: { type: "string" },
      weights: { type: "string", default: "4,0" },
      temperature: { type: "string", default: "1" },
      shuffle: { type: "boolean", default: false },
      "corrupt-id": { type: "string" },
    },
  });
  const mode = values.mode;
  if (mode !== "numeric" && mode !== "image") {
    throw new Error(`--mode must be 'numeric' or 'image', got '${mode}'`);
  }
  const functionName = values.function ?? (mode === "numeric" ? "ishigami" : "classifier");
  if (mode === "image" && functionName !== "classifier") {
    throw new Error(`image mode serves only --function classifier, got '${functionName}'`);
  }
  const weights = values.weights.split(",").map(Number);
  if (weights.length !== 2 || weights.some((w) => !Number.isFinite(w))) {
    throw new Error(`--weights must be two comma-separated numbers, got '${values.weights}'`);
  }
  const temperature = Number(values.temperature);
  if (!(temperature > 0)) {
    throw new Error(`--temperature must be positive, got '${values.temperature}'`);
  }
  const corruptId = values["corrupt-id"] === undefined ? null : Number(values["corrupt-id"]);
  if (corruptId !== null && !Number.isInteger(corruptId)) {
    throw new Error(`--corrupt-id must be an integer, got '${values["corrupt-id"]}'`);
  }
  return {
    mode,
    functionName,
    weights: [weights[0], weights[1]],
    temperature,
    shuffle: values.shuffle,
    corruptId,
  };
}

export function handleLine(
  line: string,
  mode: "numeric" | "image",
  fn: NumericFunction | null,
  model: ImageModel | null,
): EvalResponse {
  let request;
  try {
    request = parseRequest(line, mode);
  } catch (err) {
    const id = err instanceof RequestError ? err.id : null;
    return { id, error: (err as Error).message };
  }
  try {
    if (mode === "numeric") {
      const y = fn!(request.xi!);
      if (!Number.isFinite(y)) {
        return { id: request.id, error: `function returned non-finite value ${y}` };
      }
      return { id: request.id, y };
    }
    return { id: request.id, probs: model!.predict(readPng(request.path!)) };
  } catch (err) {
    return { id: request.id, error: (err as Error).message };
  }
}

export async function serve(spec: RunnerSpec): Promise<void> {
  const envMode = process.env.GPC_SENSE_MODE;
  if (envMode !== undefined && envMode !== spec.mode) {
    throw new Error(`GPC_SENSE_MODE='${envMode}' does not match --mode '${spec.mode}'`);
  }
  const fn = spec.mode === "numeric" ? resolveFunction(spec.functionName) : null;
  const model =
    spec.mode === "image"
      ? new SyntheticClassifier({ weights: spec.weights, temperature: spec.temperature })
      : null;

  const buffered: string[] = [];
  const emit = (response: EvalResponse | Record<string, unknown>) => {
    if (!spec.shuffle) {
      process.stdout.write(serializeResponse(response));
      return;
    }
    buffered.push(serializeResponse(response));
    if (buffered.length === SHUFFLE_BLOCK) {
      buffered.reverse();
      process.stdout.write(buffered.join(""));
      buffered.length = 0;
    }
  };

  for await (const line of readline.createInterface({ input: process.stdin })) {
    if (line.trim() === "") {
      continue;
    }
    const response = handleLine(line, spec.mode, fn, model);
    if (spec.corruptId !== null && "id" in response && response.id === spec.corruptId) {
      emit({ id: spec.corruptId, y: "deliberately corrupted" });
    } else {
      emit(response);
    }
  }
  if (buffered.length > 0) {
    buffered.reverse();
    process.stdout.write(buffered.join(""));
    buffered.length = 0;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  let spec: RunnerSpec;
  try {
    spec = parseCliArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exit(2);
  }
  serve(spec).catch((err) => {
    console.error(`error: ${(err as Error).message}`);
    process.exit(2);
  });
}
