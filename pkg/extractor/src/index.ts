export { Emb1Writer, readEmb1, packHeader, EMB1_MAGIC, HEADER_BYTES } from './emb1.js'
export type { Emb1File } from './emb1.js'
export { DataError, UsageError } from './errors.js'
export { decodePng, resizeBilinear } from './image.js'
export type { DecodedImage } from './image.js'
export { embedBatch, loadWeights, LW_MAGIC, LW_HEADER_BYTES } from './model.js'
export type { LinearModel } from './model.js'
export { EXTRACTORS, getSpec } from './specs.js'
export type { ExtractorSpec } from './specs.js'
export { extract } from './extract.js'
export type { ExtractOptions, ExtractResult, SkipEntry } from './extract.js'
