/**
 * JSON parser that keeps the source text of every number.
 *
 * The inspector promises that every number it shows is byte-equal to the
 * engine's own serialization. JSON.parse would round numbers through a
 * double and re-format them on display, which can change the spelling
 * (exponent thresholds differ between serializers). Parsing here keeps the
 * original lexeme alongside the numeric value, so views print the lexeme
 * and only use the value for geometry.
 */

export class JNum {
  constructor(readonly text: string) {}

  get value(): number {
    return Number(this.text);
  }

  toString(): string {
    return this.text;
  }
}

export type Json = null | boolean | string | JNum | Json[] | JObj;

export interface JObj {
  [key: string]: Json;
}

export class JsonSyntaxError extends Error {
  constructor(message: string, readonly position: number) {
    super(`${message} at offset ${position}`);
    this.name = "JsonSyntaxError";
  }
}

const NUMBER = /^-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/;
const ESCAPES: Record<string, string> = {
  '"': '"', "\\": "\\", "/": "/", b: "\b", f: "\f",
  n: "\n", r: "\r", t: "\t",
};

export function parseJson(text: string): Json {
  let pos = 0;

  function fail(message: string): never {
    throw new JsonSyntaxError(message, pos);
  }

  function skipWs(): void {
    while (pos < text.length && " \t\n\r".includes(text[pos])) pos++;
  }

  function literal(word: string, value: Json): Json {
    if (text.startsWith(word, pos)) {
      pos += word.length;
      return value;
    }
    fail(`expected ${word}`);
  }

  function parseString(): string {
    // caller consumed the opening quote
    let out = "";
    while (pos < text.length) {
      const ch = text[pos++];
      if (ch === '"') return out;
      if (ch === "\\") {
        const esc = text[pos++];
        if (esc === "u") {
          const hex = text.slice(pos, pos + 4);
          if (!/^[0-9a-fA-F]{4}$/.test(hex)) fail("bad unicode escape");
          pos += 4;
          out += String.fromCharCode(parseInt(hex, 16));
        } else if (esc in ESCAPES) {
          out += ESCAPES[esc];
        } else {
          fail(`bad escape \\${esc}`);
        }
      } else {
        out += ch;
      }
    }
    fail("unterminated string");
  }

  function parseValue(): Json {
    skipWs();
    if (pos >= text.length) fail("unexpected end of input");
    const ch = text[pos];
    if (ch === "{") {
      pos++;
      const obj: JObj = {};
      skipWs();
      if (text[pos] === "}") { pos++; return obj; }
      for (;;) {
        skipWs();
        if (text[pos] !== '"') fail("expected object key");
        pos++;
        const key = parseString();
        skipWs();
        if (text[pos] !== ":") fail("expected ':'");
        pos++;
        obj[key] = parseValue();
        skipWs();
        if (text[pos] === ",") { pos++; continue; }
        if (text[pos] === "}") { pos++; return obj; }
        fail("expected ',' or '}'");
      }
    }
    if (ch === "[") {
      pos++;
      const arr: Json[] = [];
      skipWs();
      if (text[pos] === "]") { pos++; return arr; }
      for (;;) {
        arr.push(parseValue());
        skipWs();
        if (text[pos] === ",") { pos++; continue; }
        if (text[pos] === "]") { pos++; return arr; }
        fail("expected ',' or ']'");
      }
    }
    if (ch === '"') { pos++; return parseString(); }
    if (ch === "t") return literal("true", true);
    if (ch === "f") return literal("false", false);
    if (ch === "n") return literal("null", null);
    const m = NUMBER.exec(text.slice(pos));
    if (m) {
      pos += m[0].length;
      return new JNum(m[0]);
    }
    fail(`unexpected character ${JSON.stringify(ch)}`);
  }

  const value = parseValue();
  skipWs();
  if (pos !== text.length) fail("trailing content");
  return value;
}

// -- typed accessors ---------------------------------------------------------
// The engine's shapes are stable, so a missing or mistyped field is a bug
// worth failing loudly on rather than rendering blanks.

export function asObj(v: Json, what = "value"): JObj {
  if (v !== null && typeof v === "object" && !(v instanceof JNum) && !Array.isArray(v)) {
    return v;
  }
  throw new TypeError(`expected object for ${what}`);
}

export function asArr(v: Json, what = "value"): Json[] {
  if (Array.isArray(v)) return v;
  throw new TypeError(`expected array for ${what}`);
}

export function asStr(v: Json, what = "value"): string {
  if (typeof v === "string") return v;
  throw new TypeError(`expected string for ${what}`);
}

export function asNum(v: Json, what = "value"): JNum {
  if (v instanceof JNum) return v;
  throw new TypeError(`expected number for ${what}`);
}

export function asStrOrNull(v: Json): string | null {
  return v === null ? null : asStr(v);
}

export function getField(obj: JObj, key: string): Json {
  if (!(key in obj)) throw new TypeError(`missing field '${key}'`);
  return obj[key];
}

export const field = {
  obj: (o: JObj, k: string) => asObj(getField(o, k), k),
  arr: (o: JObj, k: string) => asArr(getField(o, k), k),
  str: (o: JObj, k: string) => asStr(getField(o, k), k),
  num: (o: JObj, k: string) => asNum(getField(o, k), k),
};
