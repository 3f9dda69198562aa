/**
 * Navigation state machine, DOM-free so tests can drive it directly.
 *
 * Holds the session, the pivot selection, and the operation history with
 * step traces mirroring the server's log. One mutating request is in
 * flight at a time; a rejected operation leaves the state untouched.
 */

import { ApiClient } from "./api.js";
import { renderGrid } from "./grid.js";
import type {
    HistoryEntry,
    OlapOpDoc,
    PivotSelection,
    SchemaSummary,
    ViewPayload,
} from "./types.js";

export interface NavState {
    sessionId: string | null;
    schema: SchemaSummary | null;
    pivot: PivotSelection | null;
    history: HistoryEntry[];
    view: ViewPayload | null;
    gridHtml: string;
    showApprox: boolean;
    busy: boolean;
    error: string | null;
}

export class NavController {
    readonly state: NavState = {
        sessionId: null,
        schema: null,
        pivot: null,
        history: [],
        view: null,
        gridHtml: "",
        showApprox: false,
        busy: false,
        error: null,
    };

    private listeners: ((state: NavState) => void)[] = [];

    constructor(private api: ApiClient) {}

    onChange(listener: (state: NavState) => void): void {
        this.listeners.push(listener);
    }

    private emit(): void {
        for (const listener of this.listeners) listener(this.state);
    }

    private defaultPivot(schema: SchemaSummary): PivotSelection | null {
        if (schema.dimensions.length < 2) return null;
        const [row, col, ...rest] = schema.dimensions;
        const fixed: Record<string, string> = {};
        for (const dim of rest) fixed[dim.name] = dim.bottomOrder[0];
        return { rowDim: row.name, colDim: col.name, fixed, measure: schema.measures[0] };
    }

    async loadCube(cubeDef: unknown, facts: string, fill?: string): Promise<void> {
        await this.mutate(async () => {
            const info = await this.api.createSession(cubeDef, facts, fill);
            this.state.sessionId = info.sessionId;
            this.state.schema = info.schemaSummary;
            this.state.history = [];
            this.state.pivot = this.defaultPivot(info.schemaSummary);
        });
        await this.refreshView();
    }

    setPivot(pivot: PivotSelection): Promise<void> {
        this.state.pivot = pivot;
        return this.refreshView();
    }

    setShowApprox(show: boolean): Promise<void> {
        this.state.showApprox = show;
        return this.refreshView();
    }

    /** POST one operation; on success refresh schema, grid, and history. */
    async applyOp(op: OlapOpDoc): Promise<void> {
        const sessionId = this.requireSession();
        await this.mutate(async () => {
            const result = await this.api.postOp(sessionId, op);
            this.state.history.push({
                description: result.stepTrace.description,
                steps: result.stepTrace.steps,
                flaggedCellCount: result.flaggedCellCount,
                destroyedCellCount: result.destroyedCellCount,
            });
            this.state.schema = await this.api.getSchema(sessionId);
        });
        await this.refreshView();
    }

    /** Undo is replay: a new session at the given history prefix. */
    async replayTo(prefixLength: number): Promise<void> {
        const sessionId = this.requireSession();
        await this.mutate(async () => {
            const info = await this.api.replay(sessionId, prefixLength);
            this.state.sessionId = info.sessionId;
            this.state.schema = info.schemaSummary;
            this.state.history = this.state.history.slice(0, prefixLength);
        });
        await this.refreshView();
    }

    async refreshView(): Promise<void> {
        const { sessionId, pivot } = this.state;
        if (!sessionId || !pivot) return;
        try {
            const view = await this.api.getView(sessionId, {
                row: pivot.rowDim,
                col: pivot.colDim,
                measure: pivot.measure,
                fixed: pivot.fixed,
                approx: this.state.showApprox ? 4 : undefined,
            });
            this.state.view = view;
            this.state.gridHtml = renderGrid(view, this.state.showApprox);
            this.state.error = null;
        } catch (error) {
            this.state.error = String(error instanceof Error ? error.message : error);
        }
        this.emit();
    }

    /** The trace panel text: the server's step lines, byte for byte. */
    tracePanelText(): string {
        return this.state.history
            .map((entry) => [entry.description, ...entry.steps.map((s) => "  " + s)].join("\n"))
            .join("\n");
    }

    private requireSession(): string {
        if (!this.state.sessionId) throw new Error("no session loaded");
        return this.state.sessionId;
    }

    private async mutate(action: () => Promise<void>): Promise<void> {
        if (this.state.busy) throw new Error("another operation is in flight");
        this.state.busy = true;
        this.emit();
        try {
            await action();
            this.state.error = null;
        } catch (error) {
            this.state.error = String(error instanceof Error ? error.message : error);
            throw error;
        } finally {
            this.state.busy = false;
            this.emit();
        }
    }
}
