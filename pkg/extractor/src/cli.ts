#!/usr/bin/env node
// extract --model <name> --images <dir> --out <file.emb> [--batch 64]
// [--weights <file.lw>]. Exit codes: 0 success, 1 usage error, 2 data error.

import { parseArgs } from 'node:util'
import { pathToFileURL } from 'node:url'
import { extract } from './extract.js'
import { DataError, UsageError } from './errors.js'
import { getSpec } from './specs.js'

const USAGE =
  'usage: extract --model <name> --images <dir> --out <file.emb> ' +
  '[--batch <n>] [--weights <file.lw>]'

export async function main(argv: string[]): Promise<number> {
  try {
    const { values } = parseArgs({
      args: argv,
      options: {
        model: { type: 'string' },
        images: { type: 'string' },
        out: { type: 'string' },
        batch: { type: 'string', default: '64' },
        weights: { type: 'string' },
        help: { type: 'boolean', default: false },
      },
    })
    if (values.help) {
      console.log(USAGE)
      return 0
    }
    for (const field of ['model', 'images', 'out'] as const) {
      if (!values[field]) {
        throw new UsageError(`missing --${field}\n${USAGE}`)
      }
    }
    const batch = Number(values.batch)
    if (!Number.isInteger(batch) || batch < 1) {
      throw new UsageError(`--batch must be a positive integer, got ${values.batch}`)
    }
    const result = await extract({
      images: values.images!,
      spec: getSpec(values.model!),
      out: values.out!,
      weightsPath: values.weights,
      batchSize: batch,
    })
    console.log(
      JSON.stringify(
        {
          out: result.out,
          dim: result.dim,
          count: result.count,
          skipped: result.skipped.length,
          manifest: result.manifest,
        },
        null,
        2,
      ),
    )
    return 0
  } catch (err) {
    if (err instanceof UsageError || err instanceof DataError) {
      console.error(`error: ${err.message}`)
      return err.exitCode
    }
    if (err instanceof Error && err.message.includes('Unknown option')) {
      console.error(`error: ${err.message}\n${USAGE}`)
      return 1
    }
    throw err
  }
}

const invokedDirectly =
  process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href
if (invokedDirectly) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      console.error(err)
      process.exit(2)
    },
  )
}
