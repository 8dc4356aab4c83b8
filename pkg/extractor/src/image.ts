import { readFile } from 'node:fs/promises'
import { PNG } from 'pngjs'
import { DataError } from './errors.js'

export interface DecodedImage {
  width: number
  height: number
  /** Packed RGB, 3 bytes per pixel, row-major. */
  rgb: Uint8Array
}

export async function decodePng(path: string): Promise<DecodedImage> {
  let buf: Buffer
  try {
    buf = await readFile(path)
  } catch (err) {
    throw new DataError(`cannot read ${path}: ${(err as Error).message}`)
  }
  let png: PNG
  try {
    png = PNG.sync.read(buf)
  } catch (err) {
    throw new DataError(`cannot decode ${path}: ${(err as Error).message}`)
  }
  const { width, height, data } = png
  const rgb = new Uint8Array(width * height * 3)
  for (let p = 0; p < width * height; p++) {
    rgb[p * 3] = data[p * 4]
    rgb[p * 3 + 1] = data[p * 4 + 1]
    rgb[p * 3 + 2] = data[p * 4 + 2]
  }
  return { width, height, rgb }
}

/**
 * Bilinear resize to size x size, returning RGB floats in [0, 1] (pixel
 * centers aligned, the usual half-pixel mapping). Pure float64 arithmetic,
 * so output is deterministic for a given input.
 */
export function resizeBilinear(img: DecodedImage, size: number): Float32Array {
  const { width, height, rgb } = img
  const out = new Float32Array(size * size * 3)
  const sx = width / size
  const sy = height / size
  for (let y = 0; y < size; y++) {
    const fy = Math.min(Math.max((y + 0.5) * sy - 0.5, 0), height - 1)
    const y0 = Math.floor(fy)
    const y1 = Math.min(y0 + 1, height - 1)
    const wy = fy - y0
    for (let x = 0; x < size; x++) {
      const fx = Math.min(Math.max((x + 0.5) * sx - 0.5, 0), width - 1)
      const x0 = Math.floor(fx)
      const x1 = Math.min(x0 + 1, width - 1)
      const wx = fx - x0
      for (let c = 0; c < 3; c++) {
        const v00 = rgb[(y0 * width + x0) * 3 + c]
        const v01 = rgb[(y0 * width + x1) * 3 + c]
        const v10 = rgb[(y1 * width + x0) * 3 + c]
        const v11 = rgb[(y1 * width + x1) * 3 + c]
        const top = v00 + (v01 - v00) * wx
        const bot = v10 + (v11 - v10) * wx
        out[(y * size + x) * 3 + c] = Math.fround((top + (bot - top) * wy) / 255)
      }
    }
  }
  return out
}
