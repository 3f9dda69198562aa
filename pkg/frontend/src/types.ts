/**
 * Wire types of the cubealg HTTP API. The client treats every value as an
 * opaque exact string: all algebra happens on the server.
 */

export type Side = "below" | "above";

export type CondNode =
    | { type: "levelEq"; dim: string; level: string; member: string }
    | { type: "levelLt"; dim: string; level: string; member: string; side: Side }
    | { type: "measureEq"; measure: string; value: string }
    | { type: "measureLt"; measure: string; value: string; side: Side }
    | { type: "not"; child: CondNode }
    | { type: "and"; left: CondNode; right: CondNode }
    | { type: "or"; left: CondNode; right: CondNode };

export type AggFn = "SUM" | "AVG" | "MIN" | "MAX" | "COUNT" | "COUNT-DISTINCT";

export interface AggPair {
    measure: string;
    fn: AggFn;
}

export type OlapOpDoc =
    | { type: "dice"; condition: CondNode }
    | { type: "slice"; dimension: string }
    | { type: "sliceDice"; dimension: string; member: string }
    | { type: "rollUp"; dimension: string; level: string; aggs: AggPair[] }
    | { type: "drillDown"; dimension: string; level: string; aggs: AggPair[] };

export interface DimensionSummary {
    name: string;
    bottomLevel: string;
    levels: string[];
    levelEdges: string[][];
    members: Record<string, string[]>;
    bottomOrder: string[];
}

export interface SchemaSummary {
    dimensions: DimensionSummary[];
    measures: string[];
    computedMeasures: string[];
    cellCount: number;
    flaggedCellCount: number;
    destroyedCellCount: number;
}

export interface SessionInfo {
    sessionId: string;
    schemaSummary: SchemaSummary;
}

export interface StepTrace {
    description: string;
    steps: string[];
}

export interface OpResponse {
    flaggedCellCount: number;
    destroyedCellCount: number;
    measures: string[];
    stepTrace: StepTrace;
}

export interface ViewCell {
    value: string;
    flag: 0 | 1;
    approx?: string;
}

export interface ViewPayload {
    rowDim: string;
    colDim: string;
    measure: string;
    fixed: Record<string, string>;
    rows: string[];
    cols: string[];
    cells: (ViewCell | null)[][];
}

export interface PivotSelection {
    rowDim: string;
    colDim: string;
    fixed: Record<string, string>;
    measure: string;
}

/** One applied operation as the client remembers it. */
export interface HistoryEntry {
    description: string;
    steps: string[];
    flaggedCellCount: number;
    destroyedCellCount: number;
}
