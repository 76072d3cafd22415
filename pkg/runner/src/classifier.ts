// Synthetic image classifier: a stand-in for a real model that reacts to
// both brightness and geometry, so perturbation studies have signal.
//
// Features on the decoded image (alpha ignored):
//   m — mean intensity over all pixels and colour channels, scaled to [0, 1]
//   z — fraction of border pixels whose colour channels are all zero
// Class-1 probability:
//   p1 = logistic((w1*(2m - 1) + w2*z) / temperature)

import { readFileSync } from "node:fs";
import { PNG } from "pngjs";

export interface DecodedImage {
  width: number;
  height: number;
  /** RGBA bytes, row-major. */
  data: Buffer | Uint8Array;
}

export interface ClassifierSpec {
  weights: [number, number];
  temperature: number;
}

/** Adapter contract for swapping in a real model (out of test scope). */
export interface ImageModel {
  predict(image: DecodedImage): number[];
}

export function readPng(path: string): DecodedImage {
  return PNG.sync.read(readFileSync(path));
}

export function logistic(z: number): number {
  return z >= 0 ? 1.0 / (1.0 + Math.exp(-z)) : Math.exp(z) / (1.0 + Math.exp(z));
}

export function imageFeatures(image: DecodedImage): { m: number; z: number } {
  const { width, height, data } = image;
  if (width < 1 || height < 1 || data.length !== width * height * 4) {
    throw new Error(`decoded image has inconsistent dimensions ${width}x${height}`);
  }
  let intensitySum = 0;
  let borderCount = 0;
  let borderZeros = 0;
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      const offset = (row * width + col) * 4;
      const r = data[offset];
      const g = data[offset + 1];
      const b = data[offset + 2];
      intensitySum += r + g + b;
      if (row === 0 || row === height - 1 || col === 0 || col === width - 1) {
        borderCount += 1;
        if (r === 0 && g === 0 && b === 0) {
          borderZeros += 1;
        }
      }
    }
  }
  return {
    m: intensitySum / (width * height * 3 * 255),
    z: borderZeros / borderCount,
  };
}

export class SyntheticClassifier implements ImageModel {
  readonly spec: ClassifierSpec;

  constructor(spec: ClassifierSpec) {
    if (!(spec.temperature > 0)) {
      throw new Error(`temperature must be positive, got ${spec.temperature}`);
    }
    this.spec = spec;
  }

  predict(image: DecodedImage): number[] {
    const { m, z } = imageFeatures(image);
    const [w1, w2] = this.spec.weights;
    const p1 = logistic((w1 * (2.0 * m - 1.0) + w2 * z) / this.spec.temperature);
    return [1.0 - p1, p1];
  }
}
