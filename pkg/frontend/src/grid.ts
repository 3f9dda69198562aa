/**
 * Pivot grid renderer. Values are printed verbatim from the server payload
 * (the client never computes or reformats cube values); destroyed cells
 * render as hatched blanks, flag-0 cells are dimmed.
 */

import type { ViewPayload } from "./types.js";

function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

export function renderGrid(view: ViewPayload, showApprox = false): string {
    const fixed = Object.entries(view.fixed)
        .map(([dim, member]) => `${dim}=${member}`)
        .join(" ");
    const caption = `${view.measure} by ${view.rowDim} × ${view.colDim}` + (fixed ? ` @ ${fixed}` : "");
    const head = view.cols.map((c) => `<th scope="col">${escapeHtml(c)}</th>`).join("");
    const body = view.rows
        .map((rowMember, r) => {
            const cells = view.cells[r]
                .map((cell) => {
                    if (cell === null) {
                        return `<td class="destroyed" title="destroyed cell"></td>`;
                    }
                    const classes = cell.flag ? "active" : "inactive";
                    const shown = showApprox && cell.approx !== undefined ? cell.approx : cell.value;
                    const title = cell.approx !== undefined ? ` title="≈ ${escapeHtml(cell.approx)}"` : "";
                    return `<td class="${classes}"${title}>${escapeHtml(shown)}</td>`;
                })
                .join("");
            return `<tr><th scope="row">${escapeHtml(rowMember)}</th>${cells}</tr>`;
        })
        .join("");
    return (
        `<table class="pivot"><caption>${escapeHtml(caption)}</caption>` +
        `<thead><tr><th></th>${head}</tr></thead><tbody>${body}</tbody></table>`
    );
}

/** The exact cell texts a rendered grid displays, row by row. */
export function gridCellTexts(view: ViewPayload, showApprox = false): (string | null)[][] {
    return view.cells.map((row) =>
        row.map((cell) => {
            if (cell === null) return null;
            return showApprox && cell.approx !== undefined ? cell.approx : cell.value;
        }),
    );
}
