/** Minimal VXD parser: enough structure for rendering and comparison.
 *
 * Handles the eight-tag vocabulary case-insensitively, quoted
 * attributes, the empty-element and open forms of <link>, and the five
 * XML entities plus numeric character references.  Text is preserved
 * verbatim.
 */

export interface ElementNode {
  tag: string;
  attrs: Record<string, string>;
  children: (ElementNode | string)[];
}

const CANONICAL: Record<string, string> = {
  body: "body",
  div: "div",
  p: "p",
  seg: "seg",
  rs: "rs",
  name: "name",
  link: "link",
  linkgrp: "linkGrp",
};

const NAMED_ENTITIES: Record<string, string> = {
  lt: "<",
  gt: ">",
  amp: "&",
  quot: '"',
  apos: "'",
};

function unescapeText(raw: string): string {
  return raw.replace(/&(#x[0-9a-fA-F]+|#\d+|[a-zA-Z]+);/g, (whole, ref: string) => {
    if (ref.startsWith("#x") || ref.startsWith("#X")) {
      return String.fromCodePoint(parseInt(ref.slice(2), 16));
    }
    if (ref.startsWith("#")) {
      return String.fromCodePoint(parseInt(ref.slice(1), 10));
    }
    return NAMED_ENTITIES[ref.toLowerCase()] ?? whole;
  });
}

const TAG_RE = /<(\/?)([a-zA-Z]+)((?:\s+[a-zA-Z][\w.-]*\s*=\s*"[^"]*")*)\s*(\/?)>/g;
const ATTR_RE = /([a-zA-Z][\w.-]*)\s*=\s*"([^"]*)"/g;

export function parseVxd(text: string): ElementNode {
  TAG_RE.lastIndex = 0;
  const stack: ElementNode[] = [];
  let root: ElementNode | null = null;
  let cursor = 0;
  let match: RegExpExecArray | null;

  const appendText = (upto: number) => {
    if (upto > cursor && stack.length > 0) {
      const raw = text.slice(cursor, upto);
      const top = stack[stack.length - 1];
      // structural containers carry no significant text: pretty-print
      // whitespace and ;; comments are dropped, mirroring the service
      if (raw.length > 0 && isTextBearing(top)) {
        top.children.push(unescapeText(raw));
      }
    }
  };

  while ((match = TAG_RE.exec(text)) !== null) {
    appendText(match.index);
    cursor = TAG_RE.lastIndex;
    const [, closing, rawTag, rawAttrs, selfClosed] = match;
    const tag = CANONICAL[rawTag.toLowerCase()];
    if (!tag) {
      throw new Error(`unknown tag <${rawTag}>`);
    }
    if (closing) {
      if (tag === "link") {
        continue; // tolerated explicit close of a void element
      }
      const closed = stack.pop();
      if (!closed || closed.tag !== tag) {
        throw new Error(`mismatched </${rawTag}>`);
      }
      if (stack.length === 0) {
        root = closed;
      }
      continue;
    }
    const attrs: Record<string, string> = {};
    ATTR_RE.lastIndex = 0;
    let attr: RegExpExecArray | null;
    while ((attr = ATTR_RE.exec(rawAttrs)) !== null) {
      attrs[attr[1].toLowerCase()] = unescapeText(attr[2]);
    }
    const node: ElementNode = { tag, attrs, children: [] };
    if (stack.length > 0) {
      stack[stack.length - 1].children.push(node);
    }
    if (tag === "link" || selfClosed) {
      if (stack.length === 0) {
        root = node;
      }
      continue;
    }
    stack.push(node);
  }
  if (!root) {
    throw new Error("no root element");
  }
  return root;
}

export function walk(node: ElementNode, visit: (el: ElementNode) => void): void {
  visit(node);
  for (const child of node.children) {
    if (typeof child !== "string") {
      walk(child, visit);
    }
  }
}

export function textContent(node: ElementNode): string {
  let out = "";
  for (const child of node.children) {
    out += typeof child === "string" ? child : textContent(child);
  }
  return out;
}

export function elementsByTag(root: ElementNode, tag: string): ElementNode[] {
  const found: ElementNode[] = [];
  walk(root, (el) => {
    if (el.tag === tag) {
      found.push(el);
    }
  });
  return found;
}

export function isUnit(el: ElementNode): boolean {
  return el.tag === "seg" && (el.attrs["type"] ?? "").toLowerCase() === "unit";
}

export function isTextBearing(el: ElementNode): boolean {
  if (el.tag === "p" || el.tag === "rs" || el.tag === "name") {
    return true;
  }
  const segType = (el.attrs["type"] ?? "").toLowerCase();
  return el.tag === "seg" && (segType === "unit" || segType === "open");
}
