/**
 * Minimal GLB (binary glTF 2.0) reader: positions and triangle indices of
 * every triangle primitive, concatenated. Files are Y-up per the format;
 * vertices are converted to the server's Z-up convention so picked points
 * can be sent back without translation.
 */

export interface ParsedMesh {
  positions: Float32Array; // xyz per vertex, Z-up
  indices: Uint32Array;    // triangle list
}

const COMPONENT_BYTES: Record<number, number> = {
  5120: 1, 5121: 1, 5122: 2, 5123: 2, 5125: 4, 5126: 4,
};
const TYPE_COUNTS: Record<string, number> = { SCALAR: 1, VEC2: 2, VEC3: 3, VEC4: 4 };

export function parseGlb(buffer: ArrayBuffer): ParsedMesh {
  const view = new DataView(buffer);
  if (view.getUint32(0, true) !== 0x46546c67) throw new Error("not a GLB container");
  if (view.getUint32(4, true) !== 2) throw new Error("unsupported GLB version");
  let offset = 12;
  let json: any = null;
  let bin: ArrayBuffer | null = null;
  while (offset + 8 <= buffer.byteLength) {
    const chunkLength = view.getUint32(offset, true);
    const chunkType = view.getUint32(offset + 4, true);
    const chunk = buffer.slice(offset + 8, offset + 8 + chunkLength);
    if (chunkType === 0x4e4f534a) {
      json = JSON.parse(new TextDecoder().decode(chunk));
    } else if (chunkType === 0x004e4942) {
      bin = chunk;
    }
    offset += 8 + chunkLength;
  }
  if (json === null) throw new Error("GLB has no JSON chunk");

  function readAccessor(index: number): { data: ArrayBufferLike; count: number; componentType: number; ncomp: number } {
    const accessor = json.accessors[index];
    const bufferView = json.bufferViews[accessor.bufferView];
    if (bufferView.buffer !== 0 || bin === null) throw new Error("external buffers unsupported");
    const ncomp = TYPE_COUNTS[accessor.type];
    const start = (bufferView.byteOffset ?? 0) + (accessor.byteOffset ?? 0);
    const byteLength = accessor.count * ncomp * COMPONENT_BYTES[accessor.componentType];
    return {
      data: bin.slice(start, start + byteLength),
      count: accessor.count,
      componentType: accessor.componentType,
      ncomp,
    };
  }

  const positionArrays: Float32Array[] = [];
  const indexArrays: Uint32Array[] = [];
  let vertexBase = 0;
  for (const mesh of json.meshes ?? []) {
    for (const primitive of mesh.primitives ?? []) {
      if ((primitive.mode ?? 4) !== 4) continue;
      const posIndex = primitive.attributes?.POSITION;
      if (posIndex === undefined) continue;
      const pos = readAccessor(posIndex);
      if (pos.componentType !== 5126) throw new Error("POSITION must be float32");
      const yUp = new Float32Array(pos.data);
      const zUp = new Float32Array(yUp.length);
      for (let i = 0; i < yUp.length; i += 3) {
        zUp[i] = yUp[i];          // x = x
        zUp[i + 1] = -yUp[i + 2]; // y = -z
        zUp[i + 2] = yUp[i + 1];  // z = y
      }
      positionArrays.push(zUp);

      let tri: Uint32Array;
      if (primitive.indices !== undefined) {
        const idx = readAccessor(primitive.indices);
        if (idx.componentType === 5121) tri = Uint32Array.from(new Uint8Array(idx.data));
        else if (idx.componentType === 5123) tri = Uint32Array.from(new Uint16Array(idx.data));
        else tri = new Uint32Array(idx.data);
      } else {
        tri = Uint32Array.from({ length: pos.count }, (_, i) => i);
      }
      const shifted = new Uint32Array(tri.length);
      for (let i = 0; i < tri.length; i++) shifted[i] = tri[i] + vertexBase;
      indexArrays.push(shifted);
      vertexBase += pos.count;
    }
  }
  if (positionArrays.length === 0) throw new Error("GLB contains no triangle geometry");

  const positions = new Float32Array(positionArrays.reduce((n, a) => n + a.length, 0));
  let cursor = 0;
  for (const array of positionArrays) {
    positions.set(array, cursor);
    cursor += array.length;
  }
  const indices = new Uint32Array(indexArrays.reduce((n, a) => n + a.length, 0));
  cursor = 0;
  for (const array of indexArrays) {
    indices.set(array, cursor);
    cursor += array.length;
  }
  return { positions, indices };
}
