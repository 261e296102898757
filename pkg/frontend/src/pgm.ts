// Minimal binary PGM (P5) reader, enough to paint served frames.

export interface PgmImage {
  width: number;
  height: number;
  maxval: number;
  pixels: Uint8Array;
}

export function decodePgm(data: ArrayBuffer): PgmImage {
  const bytes = new Uint8Array(data);
  if (bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error("not a binary PGM (P5) image");
  }
  const isSpace = (b: number) => b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    if (pos >= bytes.length) throw new Error("truncated PGM header");
    if (bytes[pos] === 0x23) {
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      pos++;
    } else if (isSpace(bytes[pos])) {
      pos++;
    } else {
      let end = pos;
      while (end < bytes.length && !isSpace(bytes[end])) end++;
      fields.push(Number(new TextDecoder().decode(bytes.slice(pos, end))));
      pos = end;
    }
  }
  pos++; // single whitespace after maxval
  const [width, height, maxval] = fields;
  const expected = width * height;
  if (bytes.length - pos < expected) throw new Error("truncated PGM raster");
  return { width, height, maxval, pixels: bytes.slice(pos, pos + expected) };
}
