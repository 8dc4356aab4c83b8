export class UsageError extends Error {
  readonly exitCode = 1
}

export class DataError extends Error {
  readonly exitCode = 2
}
