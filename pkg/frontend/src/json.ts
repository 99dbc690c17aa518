/**
 * Strict JSON scanner for transcript lines.
 *
 * JSON.parse silently rounds integers above 2^53, but transcript
 * integers are u64, so record verification needs exact values. This
 * parser returns integers as bigint (floats as number so the schema
 * layer can reject them) and is deliberately unforgiving: one JSON
 * value per input, standard escapes only, no trailing garbage.
 */

export type JsonValue =
  | bigint
  | number
  | string
  | boolean
  | null
  | JsonValue[]
  | { [key: string]: JsonValue };

class Scanner {
  at = 0;
  constructor(readonly text: string) {}

  fail(msg: string): never {
    throw new SyntaxError(`${msg} at position ${this.at}`);
  }

  peek(): string {
    return this.text[this.at] ?? "";
  }

  skipWs(): void {
    while (" \t\n\r".includes(this.peek()) && this.at < this.text.length) this.at++;
  }

  literal(word: string): void {
    if (!this.text.startsWith(word, this.at)) this.fail(`expected ${word}`);
    this.at += word.length;
  }

  value(): JsonValue {
    this.skipWs();
    const c = this.peek();
    if (c === "{") return this.object();
    if (c === "[") return this.array();
    if (c === '"') return this.string();
    if (c === "t") {
      this.literal("true");
      return true;
    }
    if (c === "f") {
      this.literal("false");
      return false;
    }
    if (c === "n") {
      this.literal("null");
      return null;
    }
    if (c === "-" || (c >= "0" && c <= "9")) return this.number();
    this.fail("unexpected character");
  }

  object(): { [key: string]: JsonValue } {
    this.literal("{");
    const out: { [key: string]: JsonValue } = Object.create(null);
    this.skipWs();
    if (this.peek() === "}") {
      this.at++;
      return out;
    }
    for (;;) {
      this.skipWs();
      const key = this.string();
      this.skipWs();
      this.literal(":");
      out[key] = this.value();
      this.skipWs();
      if (this.peek() === ",") {
        this.at++;
        continue;
      }
      this.literal("}");
      return out;
    }
  }

  array(): JsonValue[] {
    this.literal("[");
    const out: JsonValue[] = [];
    this.skipWs();
    if (this.peek() === "]") {
      this.at++;
      return out;
    }
    for (;;) {
      out.push(this.value());
      this.skipWs();
      if (this.peek() === ",") {
        this.at++;
        continue;
      }
      this.literal("]");
      return out;
    }
  }

  string(): string {
    if (this.peek() !== '"') this.fail("expected string");
    this.at++;
    let out = "";
    for (;;) {
      if (this.at >= this.text.length) this.fail("unterminated string");
      const c = this.text[this.at]!;
      if (c === '"') {
        this.at++;
        return out;
      }
      if (c === "\\") {
        this.at++;
        const e = this.text[this.at];
        this.at++;
        if (e === '"' || e === "\\" || e === "/") out += e;
        else if (e === "b") out += "\b";
        else if (e === "f") out += "\f";
        else if (e === "n") out += "\n";
        else if (e === "r") out += "\r";
        else if (e === "t") out += "\t";
        else if (e === "u") {
          const hex = this.text.slice(this.at, this.at + 4);
          if (!/^[0-9a-fA-F]{4}$/.test(hex)) this.fail("bad unicode escape");
          out += String.fromCharCode(parseInt(hex, 16));
          this.at += 4;
        } else this.fail("bad escape");
        continue;
      }
      if (c.charCodeAt(0) < 0x20) this.fail("control character in string");
      out += c;
      this.at++;
    }
  }

  number(): bigint | number {
    const start = this.at;
    if (this.peek() === "-") this.at++;
    if (this.peek() === "0") this.at++;
    else if (this.peek() >= "1" && this.peek() <= "9") {
      while (this.peek() >= "0" && this.peek() <= "9") this.at++;
    } else this.fail("bad number");
    let isInt = true;
    if (this.peek() === ".") {
      isInt = false;
      this.at++;
      if (!(this.peek() >= "0" && this.peek() <= "9")) this.fail("bad fraction");
      while (this.peek() >= "0" && this.peek() <= "9") this.at++;
    }
    if (this.peek() === "e" || this.peek() === "E") {
      isInt = false;
      this.at++;
      if (this.peek() === "+" || this.peek() === "-") this.at++;
      if (!(this.peek() >= "0" && this.peek() <= "9")) this.fail("bad exponent");
      while (this.peek() >= "0" && this.peek() <= "9") this.at++;
    }
    const raw = this.text.slice(start, this.at);
    return isInt ? BigInt(raw) : Number(raw);
  }
}

/** Parse exactly one JSON value; integers come back as bigint. */
export function parseJson(text: string): JsonValue {
  const s = new Scanner(text);
  const v = s.value();
  s.skipWs();
  if (s.at !== text.length) s.fail("trailing characters");
  return v;
}
