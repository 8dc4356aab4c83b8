// End-to-end interop: extract fixture images with the built CLI, then feed
// the EMB1 output to the percept toolchain. Requires `npm run build` first
// and an installed percept package (both part of this repo's setup).

import { describe, expect, it } from 'vitest'
import { execFile } from 'node:child_process'
import { mkdtemp, readFile, stat } from 'node:fs/promises'
import { tmpdir } from 'node:os'
import { join } from 'node:path'
import { promisify } from 'node:util'
import { fileURLToPath } from 'node:url'

const run = promisify(execFile)

const ROOT = fileURLToPath(new URL('..', import.meta.url))
const CLI = join(ROOT, 'dist', 'cli.js')
const FIXTURES = join(ROOT, 'fixtures', 'images')
const WEIGHTS = join(ROOT, 'weights', 'identity-test.lw')

async function extractTo(out: string): Promise<Record<string, unknown>> {
  const { stdout } = await run('node', [
    CLI,
    '--model', 'identity',
    '--images', FIXTURES,
    '--out', out,
    '--weights', WEIGHTS,
  ])
  return JSON.parse(stdout)
}

describe('CLI smoke', () => {
  it('built CLI exists', async () => {
    await expect(stat(CLI)).resolves.toBeDefined()
  })

  it('extracts the bundled fixtures and interoperates with percept', async () => {
    const dir = await mkdtemp(join(tmpdir(), 'smoke-'))
    const out = join(dir, 'fixtures.emb')
    const result = await extractTo(out)
    expect(result.count).toBe(16)
    expect(result.dim).toBe(512)
    expect(result.skipped).toBe(0)

    // percept stats parses the EMB1 header and payload strictly; a zero
    // exit code means the emitted file is well formed.
    const gss = join(dir, 'fixtures.gss')
    const stats = await run('percept', ['stats', '--input', out, '--out', gss])
    const summary = JSON.parse(stats.stdout)
    expect(summary.dim).toBe(512)
    expect(summary.count).toBe(16)

    // Self-distance of any set is exactly zero.
    const fd = await run('percept', ['fd', out, out])
    const dist = JSON.parse(fd.stdout)
    expect(Math.abs(dist.total)).toBeLessThan(1e-6)
  })

  it('re-extraction is bit-identical', async () => {
    const dir = await mkdtemp(join(tmpdir(), 'smoke-'))
    const a = join(dir, 'a.emb')
    const b = join(dir, 'b.emb')
    await extractTo(a)
    await extractTo(b)
    expect((await readFile(a)).equals(await readFile(b))).toBe(true)
  })

  it('reports usage errors with exit code 1', async () => {
    await expect(run('node', [CLI, '--model', 'identity'])).rejects.toMatchObject({
      code: 1,
    })
  })

  it('reports data errors with exit code 2', async () => {
    const dir = await mkdtemp(join(tmpdir(), 'smoke-'))
    await expect(
      run('node', [
        CLI,
        '--model', 'identity',
        '--images', dir,
        '--out', join(dir, 'x.emb'),
        '--weights', WEIGHTS,
      ]),
    ).rejects.toMatchObject({ code: 2 })
  })
})
