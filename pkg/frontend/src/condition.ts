/**
 * Condition builder: an editable tree of level/measure atoms under NOT, AND,
 * and OR, convertible to the server's condition document and to the pipeline
 * grammar text shown live in the UI.
 */

import type { CondNode, Side } from "./types.js";

export interface AtomDraft {
    kind: "atom";
    atomType: "level" | "measure";
    dim?: string;
    level?: string;
    measure?: string;
    cmp: "=" | "<" | ">";
    value?: string; // member name for level atoms, rational text for measures
}

export interface NotDraft {
    kind: "not";
    child: BuilderNode;
}

export interface PairDraft {
    kind: "and" | "or";
    left: BuilderNode;
    right: BuilderNode;
}

export type BuilderNode = AtomDraft | NotDraft | PairDraft;

export const RATIONAL_RE = /^-?\d+(\/\d+|\.\d+)?$/;

export function emptyAtom(): AtomDraft {
    return { kind: "atom", atomType: "level", cmp: "=" };
}

/** Null while any atom is incomplete; the UI disables submit on null. */
export function toDocument(node: BuilderNode): CondNode | null {
    switch (node.kind) {
        case "atom": {
            if (node.atomType === "level") {
                if (!node.dim || !node.level || !node.value) return null;
                if (node.cmp === "=") {
                    return { type: "levelEq", dim: node.dim, level: node.level, member: node.value };
                }
                const side: Side = node.cmp === "<" ? "below" : "above";
                return { type: "levelLt", dim: node.dim, level: node.level, member: node.value, side };
            }
            if (!node.measure || !node.value || !RATIONAL_RE.test(node.value)) return null;
            if (node.cmp === "=") {
                return { type: "measureEq", measure: node.measure, value: node.value };
            }
            const side: Side = node.cmp === "<" ? "below" : "above";
            return { type: "measureLt", measure: node.measure, value: node.value, side };
        }
        case "not": {
            const child = toDocument(node.child);
            return child && { type: "not", child };
        }
        case "and":
        case "or": {
            const left = toDocument(node.left);
            const right = toDocument(node.right);
            return left && right && { type: node.kind, left, right };
        }
    }
}

const BARE_NAME = /^[A-Za-z_][A-Za-z0-9_\-]*$/;

export function quoteName(name: string): string {
    if (BARE_NAME.test(name) && !["NOT", "AND", "OR"].includes(name)) return name;
    return '"' + name.replace(/"/g, '\\"') + '"';
}

/**
 * Grammar text of a condition document, matching the server's renderer:
 * right operands render in a tighter context so re-parsing reproduces the
 * tree.
 */
export function renderCondition(cond: CondNode, parent: "or" | "and" | "not" = "or"): string {
    switch (cond.type) {
        case "levelEq":
            return `${quoteName(cond.dim)}.${quoteName(cond.level)} = ${quoteName(cond.member)}`;
        case "levelLt": {
            const cmp = cond.side === "below" ? "<" : ">";
            return `${quoteName(cond.dim)}.${quoteName(cond.level)} ${cmp} ${quoteName(cond.member)}`;
        }
        case "measureEq":
            return `${quoteName(cond.measure)} = ${cond.value}`;
        case "measureLt": {
            const cmp = cond.side === "below" ? "<" : ">";
            return `${quoteName(cond.measure)} ${cmp} ${cond.value}`;
        }
        case "not":
            return `NOT ${renderCondition(cond.child, "not")}`;
        case "and": {
            const text = `${renderCondition(cond.left, "and")} AND ${renderCondition(cond.right, "not")}`;
            return parent === "not" ? `(${text})` : text;
        }
        case "or": {
            const text = `${renderCondition(cond.left, "or")} OR ${renderCondition(cond.right, "and")}`;
            return parent === "not" || parent === "and" ? `(${text})` : text;
        }
    }
}

/** Live preview for drafts: placeholders mark the incomplete spots. */
export function previewText(node: BuilderNode): string {
    const doc = toDocument(node);
    if (doc) return renderCondition(doc);
    switch (node.kind) {
        case "atom": {
            if (node.atomType === "level") {
                return `${node.dim ?? "?"}.${node.level ?? "?"} ${node.cmp} ${node.value ?? "?"}`;
            }
            return `${node.measure ?? "?"} ${node.cmp} ${node.value ?? "?"}`;
        }
        case "not":
            return `NOT (${previewText(node.child)})`;
        case "and":
            return `(${previewText(node.left)}) AND (${previewText(node.right)})`;
        case "or":
            return `(${previewText(node.left)}) OR (${previewText(node.right)})`;
    }
}
