// EMB1 binary embedding file: "EMB1" magic, uint32 LE dim, uint64 LE row
// count, then count*dim float32 LE values in row-major order.

import { open, readFile } from 'node:fs/promises'
import type { FileHandle } from 'node:fs/promises'
import { DataError } from './errors.js'

export const EMB1_MAGIC = 'EMB1'
export const HEADER_BYTES = 16

export function packHeader(dim: number, count: number): Buffer {
  if (!Number.isInteger(dim) || dim <= 0) {
    throw new DataError(`dim must be a positive integer, got ${dim}`)
  }
  if (!Number.isInteger(count) || count < 0) {
    throw new DataError(`count must be a non-negative integer, got ${count}`)
  }
  const header = Buffer.alloc(HEADER_BYTES)
  header.write(EMB1_MAGIC, 0, 'ascii')
  header.writeUInt32LE(dim, 4)
  header.writeBigUInt64LE(BigInt(count), 8)
  return header
}

function rowsToBuffer(rows: Float32Array): Buffer {
  const buf = Buffer.alloc(rows.length * 4)
  for (let i = 0; i < rows.length; i++) {
    buf.writeFloatLE(rows[i], i * 4)
  }
  return buf
}

/**
 * Streaming EMB1 writer. Rows are appended as they come; the final row
 * count is patched into the header on close(), so the caller does not
 * need to know up front how many images will survive decoding.
 */
export class Emb1Writer {
  private constructor(
    private handle: FileHandle,
    readonly dim: number,
    private offset: number,
    private rows: number,
  ) {}

  static async create(path: string, dim: number): Promise<Emb1Writer> {
    const handle = await open(path, 'w')
    await handle.write(packHeader(dim, 0), 0, HEADER_BYTES, 0)
    return new Emb1Writer(handle, dim, HEADER_BYTES, 0)
  }

  async writeRows(batch: Float32Array): Promise<void> {
    if (batch.length % this.dim !== 0) {
      throw new DataError(
        `batch length ${batch.length} is not a multiple of dim ${this.dim}`,
      )
    }
    const buf = rowsToBuffer(batch)
    await this.handle.write(buf, 0, buf.length, this.offset)
    this.offset += buf.length
    this.rows += batch.length / this.dim
  }

  async close(): Promise<number> {
    await this.handle.write(packHeader(this.dim, this.rows), 0, HEADER_BYTES, 0)
    await this.handle.close()
    return this.rows
  }
}

export interface Emb1File {
  dim: number
  count: number
  data: Float32Array
}

export async function readEmb1(path: string): Promise<Emb1File> {
  const buf = await readFile(path)
  if (buf.length < HEADER_BYTES) {
    throw new DataError(`${path}: too short for an EMB1 header (${buf.length} bytes)`)
  }
  const magic = buf.toString('ascii', 0, 4)
  if (magic !== EMB1_MAGIC) {
    throw new DataError(`${path}: unrecognized magic ${JSON.stringify(magic)}`)
  }
  const dim = buf.readUInt32LE(4)
  const count = Number(buf.readBigUInt64LE(8))
  const expected = HEADER_BYTES + count * dim * 4
  if (buf.length < expected) {
    throw new DataError(`${path}: truncated (expected ${expected} bytes, got ${buf.length})`)
  }
  if (buf.length > expected) {
    throw new DataError(`${path}: trailing bytes after payload`)
  }
  const data = new Float32Array(count * dim)
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(HEADER_BYTES + i * 4)
  }
  return { dim, count, data }
}
