/**
 * Thin-client law: the four-operation navigation issues exactly four op
 * POSTs, every grid renders byte-identical to the mocked view payload, and
 * replay-to-start is a single replay POST. The mock server computes
 * nothing, so agreement proves the client shows server values verbatim.
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { NavController } from "../src/controller.js";
import { gridCellTexts, renderGrid } from "../src/grid.js";
import type { OlapOpDoc, SchemaSummary, ViewPayload } from "../src/types.js";
import { MockServer } from "./mockserver.js";

const SCHEMA: SchemaSummary = {
    dimensions: [
        {
            name: "Product",
            bottomLevel: "Item",
            levels: ["Item", "All"],
            levelEdges: [["Item", "All"]],
            members: { Item: ["lego", "brio"], All: ["all"] },
            bottomOrder: ["lego", "brio"],
        },
        {
            name: "Location",
            bottomLevel: "City",
            levels: ["City", "Region", "Country", "All"],
            levelEdges: [["City", "Region"], ["Region", "Country"], ["Country", "All"]],
            members: {
                City: ["antwerp", "brussels", "paris", "marseille"],
                Region: ["flanders", "capital", "north", "south"],
                Country: ["belgium", "france"],
                All: ["all"],
            },
            bottomOrder: ["antwerp", "brussels", "paris", "marseille"],
        },
        {
            name: "Time",
            bottomLevel: "Day",
            levels: ["Day", "All"],
            levelEdges: [["Day", "All"]],
            members: { Day: ["d01", "d02"], All: ["all"] },
            bottomOrder: ["d01", "d02"],
        },
    ],
    measures: ["sales"],
    computedMeasures: [],
    cellCount: 16,
    flaggedCellCount: 16,
    destroyedCellCount: 0,
};

/** Distinct exact strings per request so byte-identity is meaningful. */
function viewPayload(stamp: number): ViewPayload {
    return {
        rowDim: "Product",
        colDim: "Location",
        measure: "sales",
        fixed: { Time: "d01" },
        rows: ["lego", "brio"],
        cols: ["antwerp", "brussels", "paris", "marseille"],
        cells: [
            [
                { value: `${stamp}/7`, flag: 1 },
                null,
                { value: `1*sqrt(3) + ${stamp}*sqrt(5)`, flag: 0 },
                { value: `${stamp}`, flag: 1, approx: `${stamp}.0000` },
            ],
            [null, { value: `-${stamp}/3`, flag: 0 }, { value: "0", flag: 1 }, null],
        ],
    };
}

const EXAMPLE_OPS: OlapOpDoc[] = [
    {
        type: "dice",
        condition: {
            type: "or",
            left: { type: "levelEq", dim: "Location", level: "Region", member: "flanders" },
            right: { type: "levelEq", dim: "Location", level: "Region", member: "south" },
        },
    },
    { type: "rollUp", dimension: "Location", level: "Country", aggs: [{ measure: "sales", fn: "SUM" }] },
    { type: "dice", condition: { type: "levelEq", dim: "Location", level: "Country", member: "france" } },
    { type: "drillDown", dimension: "Location", level: "Region", aggs: [{ measure: "sales", fn: "SUM" }] },
];

function scriptedServer() {
    const server = new MockServer();
    let views = 0;
    let opCount = 0;
    server.on("POST", /^\/sessions$/, () => ({
        status: 201,
        body: { sessionId: "s1", schemaSummary: SCHEMA },
    }));
    server.on("POST", /^\/sessions\/[^/]+\/ops$/, (request) => {
        opCount += 1;
        const op = (request.body as { op: OlapOpDoc }).op;
        return {
            status: 200,
            body: {
                flaggedCellCount: 16 - opCount,
                destroyedCellCount: opCount,
                measures: ["sales", "t1"],
                stepTrace: {
                    description: `op ${opCount}: ${op.type}`,
                    steps: [`τ1 = step-of-${op.type}`, "φ(1) = τ1"],
                },
            },
        };
    });
    server.on("GET", /^\/sessions\/[^/]+\/schema$/, () => ({ status: 200, body: SCHEMA }));
    server.on("GET", /^\/sessions\/[^/]+\/view/, () => {
        views += 1;
        return { status: 200, body: viewPayload(views) };
    });
    server.on("POST", /^\/sessions\/[^/]+\/replay$/, () => ({
        status: 201,
        body: { sessionId: "s2", schemaSummary: SCHEMA },
    }));
    return server;
}

describe("example navigation click-through", () => {
    it("issues exactly four op POSTs and renders mocked grids byte-identically", async () => {
        const server = scriptedServer();
        const controller = new NavController(new ApiClient("http://mock", server.fetch));

        await controller.loadCube({ any: "cube" }, "facts,csv");
        expect(controller.state.sessionId).toBe("s1");

        let expectedViews = 1; // the load triggered one view fetch
        for (const op of EXAMPLE_OPS) {
            await controller.applyOp(op);
            expectedViews += 1;
            const mocked = viewPayload(expectedViews);
            // byte-identical rendering of the mocked payload
            expect(controller.state.gridHtml).toBe(renderGrid(mocked));
            expect(gridCellTexts(controller.state.view!)).toEqual(gridCellTexts(mocked));
        }

        expect(server.count("POST", /\/ops$/)).toBe(4);
        const posted = server.requests
            .filter((r) => r.method === "POST" && /\/ops$/.test(r.path))
            .map((r) => (r.body as { op: OlapOpDoc }).op);
        expect(posted).toEqual(EXAMPLE_OPS);

        // history mirrors the server's step traces byte for byte
        expect(controller.state.history).toHaveLength(4);
        expect(controller.tracePanelText()).toContain("τ1 = step-of-rollUp");

        // replay to the start: exactly one replay POST, new session
        await controller.replayTo(0);
        expect(server.count("POST", /\/replay$/)).toBe(1);
        const replayBody = server.requests.find((r) => /\/replay$/.test(r.path))!.body;
        expect(replayBody).toEqual({ prefixLength: 0 });
        expect(controller.state.sessionId).toBe("s2");
        expect(controller.state.history).toHaveLength(0);
    });

    it("a rejected operation leaves the navigation state untouched", async () => {
        const server = scriptedServer();
        server.on("POST", /^\/sessions\/bad/, () => ({ status: 422, body: { detail: "nope" } }));
        const controller = new NavController(new ApiClient("http://mock", server.fetch));
        await controller.loadCube({ any: "cube" }, "facts");

        const failing = new MockServer();
        failing.on("POST", /^\/sessions$/, () => ({
            status: 201,
            body: { sessionId: "s1", schemaSummary: SCHEMA },
        }));
        failing.on("GET", /view/, () => ({ status: 200, body: viewPayload(1) }));
        failing.on("POST", /\/ops$/, () => ({ status: 422, body: { detail: "unknown dimension" } }));
        const fragile = new NavController(new ApiClient("http://mock", failing.fetch));
        await fragile.loadCube({ any: "cube" }, "facts");

        const before = { ...fragile.state, historyLength: fragile.state.history.length };
        await expect(
            fragile.applyOp({ type: "slice", dimension: "Weather" }),
        ).rejects.toThrow("unknown dimension");
        expect(fragile.state.history).toHaveLength(before.historyLength);
        expect(fragile.state.sessionId).toBe(before.sessionId);
        expect(fragile.state.error).toContain("unknown dimension");
    });

    it("allows only one mutating request in flight", async () => {
        const server = scriptedServer();
        const controller = new NavController(new ApiClient("http://mock", server.fetch));
        await controller.loadCube({ any: "cube" }, "facts");
        const first = controller.applyOp(EXAMPLE_OPS[0]);
        await expect(controller.applyOp(EXAMPLE_OPS[1])).rejects.toThrow("in flight");
        await first;
        expect(server.count("POST", /\/ops$/)).toBe(1);
    });
});
