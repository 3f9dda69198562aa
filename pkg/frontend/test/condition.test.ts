import { describe, expect, it } from "vitest";

import {
    BuilderNode,
    emptyAtom,
    previewText,
    quoteName,
    renderCondition,
    toDocument,
} from "../src/condition.js";

describe("condition builder", () => {
    it("builds the two-region dice of the navigation example", () => {
        const tree: BuilderNode = {
            kind: "or",
            left: { kind: "atom", atomType: "level", dim: "Location", level: "Region", cmp: "=", value: "flanders" },
            right: { kind: "atom", atomType: "level", dim: "Location", level: "Region", cmp: "=", value: "south" },
        };
        const doc = toDocument(tree);
        expect(doc).toEqual({
            type: "or",
            left: { type: "levelEq", dim: "Location", level: "Region", member: "flanders" },
            right: { type: "levelEq", dim: "Location", level: "Region", member: "south" },
        });
        expect(renderCondition(doc!)).toBe(
            "Location.Region = flanders OR Location.Region = south",
        );
    });

    it("incomplete atoms yield null (submit stays disabled)", () => {
        expect(toDocument(emptyAtom())).toBeNull();
        const half: BuilderNode = {
            kind: "and",
            left: { kind: "atom", atomType: "measure", measure: "sales", cmp: "<", value: "10" },
            right: emptyAtom(),
        };
        expect(toDocument(half)).toBeNull();
        expect(previewText(half)).toContain("?");
    });

    it("measure values must be rational literals", () => {
        const bad: BuilderNode = {
            kind: "atom", atomType: "measure", measure: "sales", cmp: "=", value: "abc",
        };
        expect(toDocument(bad)).toBeNull();
        const decimal: BuilderNode = { ...bad, value: "49.99" };
        expect(toDocument(decimal)).toEqual({ type: "measureEq", measure: "sales", value: "49.99" });
        const fraction: BuilderNode = { ...bad, value: "1/3" };
        expect(toDocument(fraction)).not.toBeNull();
    });

    it("renders NOT over a measure comparison as grammar text", () => {
        const tree: BuilderNode = {
            kind: "not",
            child: { kind: "atom", atomType: "measure", measure: "sales", cmp: "<", value: "10" },
        };
        expect(renderCondition(toDocument(tree)!)).toBe("NOT sales < 10");
    });

    it("parenthesizes exactly like the server renderer", () => {
        const doc = toDocument({
            kind: "and",
            left: {
                kind: "or",
                left: { kind: "atom", atomType: "measure", measure: "sales", cmp: "=", value: "1" },
                right: { kind: "atom", atomType: "measure", measure: "sales", cmp: "=", value: "2" },
            },
            right: {
                kind: "not",
                child: { kind: "atom", atomType: "level", dim: "Location", level: "City", cmp: "=", value: "paris" },
            },
        })!;
        expect(renderCondition(doc)).toBe(
            "(sales = 1 OR sales = 2) AND NOT Location.City = paris",
        );
    });

    it("comparison direction maps to sides", () => {
        const above = toDocument({
            kind: "atom", atomType: "measure", measure: "sales", cmp: ">", value: "50",
        });
        expect(above).toEqual({ type: "measureLt", measure: "sales", value: "50", side: "above" });
        const below = toDocument({
            kind: "atom", atomType: "level", dim: "Time", level: "Week", cmp: "<", value: "w3",
        });
        expect(below).toEqual({ type: "levelLt", dim: "Time", level: "Week", member: "w3", side: "below" });
    });

    it("quotes names that are not bare identifiers", () => {
        expect(quoteName("antwerp")).toBe("antwerp");
        expect(quoteName("1/1/2014")).toBe('"1/1/2014"');
        expect(quoteName("AND")).toBe('"AND"');
        expect(quoteName('a"b')).toBe('"a\\"b"');
    });
});
