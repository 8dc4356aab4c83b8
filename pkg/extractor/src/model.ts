// LW01 weights file: "LW01" magic, uint32 LE input dim, uint32 LE output
// dim, then inputDim*outputDim float32 LE, input-index major. The model is
// a single linear projection applied to a flattened patch grid; it stands
// in for a full network so the pipeline can run without gigabyte
// checkpoints, and is loaded the same way a real export would be.

import { readFile } from 'node:fs/promises'
import { DataError } from './errors.js'

export const LW_MAGIC = 'LW01'
export const LW_HEADER_BYTES = 12

export interface LinearModel {
  inputDim: number
  outputDim: number
  /** Grid side g with inputDim = 3 * g * g; images are resized to g x g. */
  grid: number
  weights: Float32Array
}

export async function loadWeights(path: string): Promise<LinearModel> {
  let buf: Buffer
  try {
    buf = await readFile(path)
  } catch (err) {
    throw new DataError(`cannot read weights ${path}: ${(err as Error).message}`)
  }
  if (buf.length < LW_HEADER_BYTES) {
    throw new DataError(`${path}: too short for an LW01 header`)
  }
  const magic = buf.toString('ascii', 0, 4)
  if (magic !== LW_MAGIC) {
    throw new DataError(`${path}: unrecognized weights magic ${JSON.stringify(magic)}`)
  }
  const inputDim = buf.readUInt32LE(4)
  const outputDim = buf.readUInt32LE(8)
  const expected = LW_HEADER_BYTES + inputDim * outputDim * 4
  if (buf.length !== expected) {
    throw new DataError(
      `${path}: expected ${expected} bytes for ${inputDim}x${outputDim} weights, got ${buf.length}`,
    )
  }
  const grid = Math.round(Math.sqrt(inputDim / 3))
  if (3 * grid * grid !== inputDim) {
    throw new DataError(`${path}: input dim ${inputDim} is not 3*g*g for integer g`)
  }
  const weights = new Float32Array(inputDim * outputDim)
  for (let i = 0; i < weights.length; i++) {
    weights[i] = buf.readFloatLE(LW_HEADER_BYTES + i * 4)
  }
  return { inputDim, outputDim, grid, weights }
}

/**
 * Project `rows` flattened feature rows (rows * inputDim values) through
 * the weight matrix. Accumulation runs in float64 and each output is
 * rounded to float32 once, so repeated runs are bit-identical.
 */
export function embedBatch(
  model: LinearModel,
  features: Float32Array,
  rows: number,
): Float32Array {
  const { inputDim, outputDim, weights } = model
  if (features.length !== rows * inputDim) {
    throw new DataError(
      `feature buffer length ${features.length} does not match ${rows} rows of ${inputDim}`,
    )
  }
  const out = new Float32Array(rows * outputDim)
  for (let r = 0; r < rows; r++) {
    const base = r * inputDim
    for (let o = 0; o < outputDim; o++) {
      let acc = 0
      for (let i = 0; i < inputDim; i++) {
        acc += features[base + i] * weights[i * outputDim + o]
      }
      out[r * outputDim + o] = Math.fround(acc)
    }
  }
  return out
}
