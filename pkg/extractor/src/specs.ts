import { UsageError } from './errors.js'

/**
 * A named feature extractor: where its pretrained weights come from, how
 * images must be preprocessed for it, and the embedding width it emits.
 * The emitted EMB1 header dim always equals outputDim.
 */
export interface ExtractorSpec {
  name: string
  outputDim: number
  /** Upstream source of the pretrained checkpoint (not bundled here). */
  weightsUri: string
  /** The preprocessing this extractor expects; documented per spec because
   *  resize/crop choices materially change downstream distances. */
  preprocessing: string
}

export const EXTRACTORS: Record<string, ExtractorSpec> = {
  inception: {
    name: 'inception',
    outputDim: 2048,
    weightsUri:
      'https://download.tensorflow.org/models/image/imagenet/inception-2015-12-05.tgz',
    preprocessing: 'resize 299x299 bilinear, scale to [-1, 1], pre-logit pool',
  },
  clip: {
    name: 'clip',
    outputDim: 512,
    weightsUri: 'https://github.com/openai/CLIP',
    preprocessing: 'resize shorter side to 224, center crop 224, CLIP RGB mean/std',
  },
  swav: {
    name: 'swav',
    outputDim: 2048,
    weightsUri: 'https://github.com/facebookresearch/swav',
    preprocessing: 'resize 256 bilinear, center crop 224, ImageNet mean/std',
  },
  fairface: {
    name: 'fairface',
    outputDim: 512,
    weightsUri: 'https://github.com/dchen236/FairFace',
    preprocessing: 'resize 224x224, ImageNet mean/std, penultimate activation',
  },
  swav_ffhq: {
    name: 'swav_ffhq',
    outputDim: 2048,
    weightsUri: 'https://github.com/facebookresearch/swav',
    preprocessing: 'as swav; face-corpus fine-tuned checkpoint supplied by the user',
  },
  identity: {
    name: 'identity',
    outputDim: 512,
    weightsUri: 'https://github.com/deepinsight/insightface',
    preprocessing: 'face crop, resize 112x112, scale to [-1, 1], embedding layer',
  },
}

export function getSpec(name: string): ExtractorSpec {
  const spec = EXTRACTORS[name]
  if (!spec) {
    const known = Object.keys(EXTRACTORS).join(', ')
    throw new UsageError(`unknown extractor '${name}' (known: ${known})`)
  }
  return spec
}
