/**
 * Typed client for the session service. The fetch function is injectable so
 * tests can mock the entire server.
 */

import type { OlapOpDoc, OpResponse, SessionInfo, StepTrace, ViewPayload } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(public status: number, detail: string) {
        super(detail);
    }
}

export class ApiClient {
    constructor(
        private baseUrl: string,
        private fetchFn: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const init: RequestInit = { method, headers: {} };
        if (body !== undefined) {
            init.headers = { "Content-Type": "application/json" };
            init.body = JSON.stringify(body);
        }
        const response = await this.fetchFn(this.baseUrl + path, init);
        if (!response.ok) {
            let detail = response.statusText;
            try {
                const payload = await response.json();
                if (payload && typeof payload.detail === "string") detail = payload.detail;
            } catch {
                // keep the status text
            }
            throw new ApiError(response.status, detail);
        }
        if (response.status === 204) return undefined as T;
        return (await response.json()) as T;
    }

    createSession(cubeDef: unknown, facts: string, fill?: string): Promise<SessionInfo> {
        return this.request("POST", "/sessions", { cubeDef, facts, fill });
    }

    getSchema(sessionId: string): Promise<SessionInfo["schemaSummary"]> {
        return this.request("GET", `/sessions/${sessionId}/schema`);
    }

    postOp(sessionId: string, op: OlapOpDoc): Promise<OpResponse> {
        return this.request("POST", `/sessions/${sessionId}/ops`, { op });
    }

    getView(
        sessionId: string,
        params: { row: string; col: string; measure: string; fixed: Record<string, string>; approx?: number },
    ): Promise<ViewPayload> {
        const query = new URLSearchParams();
        query.set("row", params.row);
        query.set("col", params.col);
        query.set("measure", params.measure);
        for (const [dim, member] of Object.entries(params.fixed)) {
            query.append("fixed", `${dim}=${member}`);
        }
        if (params.approx !== undefined) query.set("approx", String(params.approx));
        return this.request("GET", `/sessions/${sessionId}/view?${query.toString()}`);
    }

    getLog(sessionId: string): Promise<{ entries: StepTrace[] }> {
        return this.request("GET", `/sessions/${sessionId}/log`);
    }

    replay(sessionId: string, prefixLength: number): Promise<SessionInfo> {
        return this.request("POST", `/sessions/${sessionId}/replay`, { prefixLength });
    }

    deleteSession(sessionId: string): Promise<void> {
        return this.request("DELETE", `/sessions/${sessionId}`);
    }
}
