import { readdir, writeFile } from 'node:fs/promises'
import * as path from 'node:path'
import { fileURLToPath } from 'node:url'
import { Emb1Writer } from './emb1.js'
import { DataError } from './errors.js'
import { decodePng, resizeBilinear } from './image.js'
import { embedBatch, loadWeights } from './model.js'
import type { ExtractorSpec } from './specs.js'

export interface ExtractOptions {
  images: string
  spec: ExtractorSpec
  out: string
  /** Local LW01 weights; required unless the spec's weightsUri is file:. */
  weightsPath?: string
  batchSize?: number
  /** Called once per skipped file; defaults to console.warn. */
  warn?: (msg: string) => void
}

export interface SkipEntry {
  file: string
  reason: string
}

export interface ExtractResult {
  out: string
  dim: number
  count: number
  skipped: SkipEntry[]
  /** Path of the skip manifest, or null when nothing was skipped. */
  manifest: string | null
}

function resolveWeightsPath(opts: ExtractOptions): string {
  if (opts.weightsPath) return opts.weightsPath
  if (opts.spec.weightsUri.startsWith('file:')) {
    return fileURLToPath(opts.spec.weightsUri)
  }
  throw new DataError(
    `pretrained weights for '${opts.spec.name}' are not bundled; ` +
      `obtain them from ${opts.spec.weightsUri} and pass them via --weights`,
  )
}

/**
 * Embed every .png in a directory into one EMB1 file, one row per image
 * in lexicographic filename order (the pairing contract with manifests).
 * Undecodable images are skipped with a warning and recorded in a
 * "<out>.skipped.json" manifest; they never produce a row.
 */
export async function extract(opts: ExtractOptions): Promise<ExtractResult> {
  const warn = opts.warn ?? ((msg: string) => console.warn(msg))
  const batchSize = opts.batchSize ?? 64
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new DataError(`batch size must be a positive integer, got ${batchSize}`)
  }

  const model = await loadWeights(resolveWeightsPath(opts))
  if (model.outputDim !== opts.spec.outputDim) {
    throw new DataError(
      `weights emit ${model.outputDim} dims but extractor '${opts.spec.name}' ` +
        `requires ${opts.spec.outputDim}`,
    )
  }

  let names: string[]
  try {
    names = (await readdir(opts.images)).filter((n) => n.toLowerCase().endsWith('.png'))
  } catch (err) {
    throw new DataError(`cannot list ${opts.images}: ${(err as Error).message}`)
  }
  names.sort()
  if (names.length === 0) {
    throw new DataError(`no .png images in ${opts.images}`)
  }

  const writer = await Emb1Writer.create(opts.out, opts.spec.outputDim)
  const skipped: SkipEntry[] = []
  const { inputDim, grid } = model
  for (let start = 0; start < names.length; start += batchSize) {
    const batchNames = names.slice(start, start + batchSize)
    const features = new Float32Array(batchNames.length * inputDim)
    let rows = 0
    for (const name of batchNames) {
      try {
        const img = await decodePng(path.join(opts.images, name))
        features.set(resizeBilinear(img, grid), rows * inputDim)
        rows += 1
      } catch (err) {
        const reason = (err as Error).message
        skipped.push({ file: name, reason })
        warn(`skipping ${name}: ${reason}`)
      }
    }
    if (rows > 0) {
      await writer.writeRows(embedBatch(model, features.subarray(0, rows * inputDim), rows))
    }
  }
  const count = await writer.close()

  let manifest: string | null = null
  if (skipped.length > 0) {
    manifest = `${opts.out}.skipped.json`
    await writeFile(manifest, JSON.stringify({ skipped }, null, 2) + '\n')
  }
  return { out: opts.out, dim: opts.spec.outputDim, count, skipped, manifest }
}
