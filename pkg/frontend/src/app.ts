/**
 * DOM wiring: forms for loading a cube and applying operations, the pivot
 * grid, the condition builder, the trace panel, and replay-based undo.
 * All state lives in NavController; this file only reads and renders it.
 */

import { ApiClient } from "./api.js";
import {
    AtomDraft,
    BuilderNode,
    emptyAtom,
    previewText,
    toDocument,
} from "./condition.js";
import { NavController } from "./controller.js";
import type { AggFn, AggPair, DimensionSummary, OlapOpDoc } from "./types.js";

const AGG_FNS: AggFn[] = ["SUM", "AVG", "MIN", "MAX", "COUNT", "COUNT-DISTINCT"];

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

function option(value: string, label = value): HTMLOptionElement {
    const node = document.createElement("option");
    node.value = value;
    node.textContent = label;
    return node;
}

function fillSelect(select: HTMLSelectElement, values: string[]): void {
    select.innerHTML = "";
    for (const value of values) select.appendChild(option(value));
}

export function startApp(baseUrl: string): void {
    const api = new ApiClient(baseUrl);
    const controller = new NavController(api);
    let conditionRoot: BuilderNode = emptyAtom();

    const dims = (): DimensionSummary[] => controller.state.schema?.dimensions ?? [];
    const measures = (): string[] => {
        const schema = controller.state.schema;
        return schema ? [...schema.measures, ...schema.computedMeasures] : [];
    };

    // --- cube loading --------------------------------------------------------

    el<HTMLButtonElement>("load-btn").addEventListener("click", async () => {
        try {
            const cubeDef = JSON.parse(el<HTMLTextAreaElement>("cube-def").value);
            const facts = el<HTMLTextAreaElement>("facts").value;
            await controller.loadCube(cubeDef, facts);
        } catch (error) {
            el("error").textContent = String(error);
        }
    });

    // --- operations -----------------------------------------------------------

    const opKind = el<HTMLSelectElement>("op-kind");
    opKind.addEventListener("change", renderOpForm);

    async function submitOp(op: OlapOpDoc): Promise<void> {
        try {
            await controller.applyOp(op);
        } catch {
            // the controller records the error; the render below shows it
        }
        render();
    }

    function aggRows(): AggPair[] {
        const rows = document.querySelectorAll<HTMLElement>("#agg-list .agg-row");
        const aggs: AggPair[] = [];
        rows.forEach((row) => {
            const measure = row.querySelector<HTMLSelectElement>(".agg-measure")!.value;
            const fn = row.querySelector<HTMLSelectElement>(".agg-fn")!.value as AggFn;
            aggs.push({ measure, fn });
        });
        return aggs;
    }

    function renderOpForm(): void {
        const host = el("op-form");
        host.innerHTML = "";
        const kind = opKind.value;
        if (!controller.state.schema) return;

        if (kind === "dice") {
            const tree = document.createElement("div");
            tree.id = "condition-tree";
            host.appendChild(tree);
            const preview = document.createElement("pre");
            preview.id = "condition-preview";
            host.appendChild(preview);
            renderConditionEditor();
            return;
        }

        const dimSelect = document.createElement("select");
        dimSelect.id = "op-dim";
        fillSelect(dimSelect, dims().map((d) => d.name));
        host.appendChild(dimSelect);

        if (kind === "sliceDice") {
            const memberSelect = document.createElement("select");
            memberSelect.id = "op-member";
            const refresh = () => {
                const dim = dims().find((d) => d.name === dimSelect.value);
                fillSelect(memberSelect, dim ? dim.bottomOrder : []);
            };
            dimSelect.addEventListener("change", refresh);
            refresh();
            host.appendChild(memberSelect);
        }

        if (kind === "rollUp" || kind === "drillDown") {
            const levelSelect = document.createElement("select");
            levelSelect.id = "op-level";
            const refresh = () => {
                const dim = dims().find((d) => d.name === dimSelect.value);
                fillSelect(levelSelect, dim ? dim.levels : []);
            };
            dimSelect.addEventListener("change", refresh);
            refresh();
            host.appendChild(levelSelect);

            const aggList = document.createElement("div");
            aggList.id = "agg-list";
            host.appendChild(aggList);
            const addAgg = () => {
                const row = document.createElement("span");
                row.className = "agg-row";
                const measureSelect = document.createElement("select");
                measureSelect.className = "agg-measure";
                fillSelect(measureSelect, measures());
                const fnSelect = document.createElement("select");
                fnSelect.className = "agg-fn";
                fillSelect(fnSelect, AGG_FNS);
                row.append(measureSelect, fnSelect);
                aggList.appendChild(row);
            };
            addAgg();
            const more = document.createElement("button");
            more.textContent = "+ aggregation";
            more.addEventListener("click", addAgg);
            host.appendChild(more);
        }
    }

    el<HTMLButtonElement>("apply-btn").addEventListener("click", () => {
        const kind = opKind.value;
        if (kind === "dice") {
            const condition = toDocument(conditionRoot);
            if (!condition) return;
            void submitOp({ type: "dice", condition });
            return;
        }
        const dimension = el<HTMLSelectElement>("op-dim").value;
        if (kind === "slice") void submitOp({ type: "slice", dimension });
        if (kind === "sliceDice") {
            void submitOp({ type: "sliceDice", dimension, member: el<HTMLSelectElement>("op-member").value });
        }
        if (kind === "rollUp" || kind === "drillDown") {
            void submitOp({
                type: kind,
                dimension,
                level: el<HTMLSelectElement>("op-level").value,
                aggs: aggRows(),
            });
        }
    });

    // --- condition builder -------------------------------------------------------

    function replaceNode(parent: BuilderNode | null, key: "child" | "left" | "right" | null, next: BuilderNode): void {
        if (!parent || !key) {
            conditionRoot = next;
        } else if (parent.kind === "not" && key === "child") {
            parent.child = next;
        } else if (parent.kind === "and" || parent.kind === "or") {
            if (key === "left") parent.left = next;
            if (key === "right") parent.right = next;
        }
        renderConditionEditor();
    }

    function atomEditor(node: AtomDraft): HTMLElement {
        const box = document.createElement("span");
        box.className = "atom";
        const typeSelect = document.createElement("select");
        typeSelect.append(option("level"), option("measure"));
        typeSelect.value = node.atomType;
        typeSelect.addEventListener("change", () => {
            node.atomType = typeSelect.value as "level" | "measure";
            renderConditionEditor();
        });
        box.appendChild(typeSelect);

        if (node.atomType === "level") {
            const dimSelect = document.createElement("select");
            fillSelect(dimSelect, dims().map((d) => d.name));
            if (node.dim) dimSelect.value = node.dim;
            node.dim = dimSelect.value || undefined;
            const levelSelect = document.createElement("select");
            const memberSelect = document.createElement("select");
            const refreshLevels = () => {
                const dim = dims().find((d) => d.name === dimSelect.value);
                fillSelect(levelSelect, dim ? dim.levels : []);
                if (node.level) levelSelect.value = node.level;
                node.level = levelSelect.value || undefined;
                refreshMembers();
            };
            const refreshMembers = () => {
                const dim = dims().find((d) => d.name === dimSelect.value);
                const members = dim?.members[levelSelect.value] ?? [];
                fillSelect(memberSelect, members);
                if (node.value) memberSelect.value = node.value;
                node.value = memberSelect.value || undefined;
                updatePreview();
            };
            dimSelect.addEventListener("change", () => {
                node.dim = dimSelect.value;
                node.level = undefined;
                node.value = undefined;
                refreshLevels();
            });
            levelSelect.addEventListener("change", () => {
                node.level = levelSelect.value;
                node.value = undefined;
                refreshMembers();
            });
            memberSelect.addEventListener("change", () => {
                node.value = memberSelect.value;
                updatePreview();
            });
            const cmpSelect = document.createElement("select");
            cmpSelect.append(option("="), option("<"), option(">"));
            cmpSelect.value = node.cmp;
            cmpSelect.addEventListener("change", () => {
                node.cmp = cmpSelect.value as AtomDraft["cmp"];
                updatePreview();
            });
            box.append(dimSelect, levelSelect, cmpSelect, memberSelect);
            refreshLevels();
        } else {
            const measureSelect = document.createElement("select");
            fillSelect(measureSelect, measures());
            if (node.measure) measureSelect.value = node.measure;
            node.measure = measureSelect.value || undefined;
            measureSelect.addEventListener("change", () => {
                node.measure = measureSelect.value;
                updatePreview();
            });
            const cmpSelect = document.createElement("select");
            cmpSelect.append(option("="), option("<"), option(">"));
            cmpSelect.value = node.cmp;
            cmpSelect.addEventListener("change", () => {
                node.cmp = cmpSelect.value as AtomDraft["cmp"];
                updatePreview();
            });
            const valueInput = document.createElement("input");
            valueInput.placeholder = "rational, e.g. 50 or 49.99";
            valueInput.value = node.value ?? "";
            valueInput.addEventListener("input", () => {
                node.value = valueInput.value || undefined;
                updatePreview();
            });
            box.append(measureSelect, cmpSelect, valueInput);
        }
        return box;
    }

    function nodeEditor(
        node: BuilderNode,
        parent: BuilderNode | null,
        key: "child" | "left" | "right" | null,
    ): HTMLElement {
        const box = document.createElement("div");
        box.className = `cond-node cond-${node.kind}`;
        if (node.kind === "atom") {
            box.appendChild(atomEditor(node));
        } else if (node.kind === "not") {
            box.appendChild(document.createTextNode("NOT"));
            box.appendChild(nodeEditor(node.child, node, "child"));
        } else {
            box.appendChild(nodeEditor(node.left, node, "left"));
            box.appendChild(document.createTextNode(node.kind.toUpperCase()));
            box.appendChild(nodeEditor(node.right, node, "right"));
        }
        const tools = document.createElement("span");
        tools.className = "tools";
        for (const [label, make] of [
            ["NOT", () => ({ kind: "not", child: node } as BuilderNode)],
            ["AND", () => ({ kind: "and", left: node, right: emptyAtom() } as BuilderNode)],
            ["OR", () => ({ kind: "or", left: node, right: emptyAtom() } as BuilderNode)],
        ] as const) {
            const btn = document.createElement("button");
            btn.textContent = label;
            btn.addEventListener("click", () => replaceNode(parent, key, make()));
            tools.appendChild(btn);
        }
        const reset = document.createElement("button");
        reset.textContent = "×";
        reset.addEventListener("click", () => replaceNode(parent, key, emptyAtom()));
        tools.appendChild(reset);
        box.appendChild(tools);
        return box;
    }

    function renderConditionEditor(): void {
        const tree = document.getElementById("condition-tree");
        if (!tree) return;
        tree.innerHTML = "";
        tree.appendChild(nodeEditor(conditionRoot, null, null));
        updatePreview();
    }

    function updatePreview(): void {
        const preview = document.getElementById("condition-preview");
        if (preview) preview.textContent = previewText(conditionRoot);
        render();
    }

    // --- pivot controls --------------------------------------------------------

    function renderPivotControls(): void {
        const host = el("pivot-controls");
        host.innerHTML = "";
        const schema = controller.state.schema;
        const pivot = controller.state.pivot;
        if (!schema || !pivot) return;

        const rowSelect = document.createElement("select");
        const colSelect = document.createElement("select");
        fillSelect(rowSelect, schema.dimensions.map((d) => d.name));
        fillSelect(colSelect, schema.dimensions.map((d) => d.name));
        rowSelect.value = pivot.rowDim;
        colSelect.value = pivot.colDim;
        const measureSelect = document.createElement("select");
        fillSelect(measureSelect, [...schema.measures, ...schema.computedMeasures]);
        measureSelect.value = pivot.measure;

        const fixedHost = document.createElement("span");
        const fixedSelects: Record<string, HTMLSelectElement> = {};
        const renderFixed = () => {
            fixedHost.innerHTML = "";
            for (const dim of schema.dimensions) {
                if (dim.name === rowSelect.value || dim.name === colSelect.value) continue;
                const label = document.createElement("label");
                label.textContent = ` ${dim.name}=`;
                const select = document.createElement("select");
                fillSelect(select, dim.bottomOrder);
                if (pivot.fixed[dim.name]) select.value = pivot.fixed[dim.name];
                fixedSelects[dim.name] = select;
                label.appendChild(select);
                fixedHost.appendChild(label);
            }
        };
        rowSelect.addEventListener("change", renderFixed);
        colSelect.addEventListener("change", renderFixed);
        renderFixed();

        const apply = document.createElement("button");
        apply.textContent = "show";
        apply.addEventListener("click", () => {
            const fixed: Record<string, string> = {};
            for (const dim of schema.dimensions) {
                if (dim.name !== rowSelect.value && dim.name !== colSelect.value) {
                    fixed[dim.name] = fixedSelects[dim.name].value;
                }
            }
            void controller.setPivot({
                rowDim: rowSelect.value,
                colDim: colSelect.value,
                fixed,
                measure: measureSelect.value,
            });
        });

        const approxLabel = document.createElement("label");
        const approxToggle = document.createElement("input");
        approxToggle.type = "checkbox";
        approxToggle.checked = controller.state.showApprox;
        approxToggle.addEventListener("change", () => void controller.setShowApprox(approxToggle.checked));
        approxLabel.append(approxToggle, document.createTextNode(" ≈ decimal"));

        host.append(rowSelect, colSelect, measureSelect, fixedHost, apply, approxLabel);
    }

    // --- history / replay ---------------------------------------------------------

    function renderHistory(): void {
        const host = el("history");
        host.innerHTML = "";
        const replay0 = document.createElement("button");
        replay0.textContent = "⟲ start";
        replay0.disabled = controller.state.busy;
        replay0.addEventListener("click", () => void controller.replayTo(0).then(render, render));
        host.appendChild(replay0);
        controller.state.history.forEach((entry, index) => {
            const item = document.createElement("div");
            item.className = "history-entry";
            const btn = document.createElement("button");
            btn.textContent = `⟲ ${index + 1}`;
            btn.disabled = controller.state.busy;
            btn.addEventListener("click", () => void controller.replayTo(index + 1).then(render, render));
            item.appendChild(btn);
            item.appendChild(
                document.createTextNode(
                    ` ${entry.description} — flagged ${entry.flaggedCellCount}, destroyed ${entry.destroyedCellCount}`,
                ),
            );
            host.appendChild(item);
        });
    }

    // --- top-level render -----------------------------------------------------------

    function render(): void {
        const state = controller.state;
        el("grid").innerHTML = state.gridHtml;
        el("trace").textContent = controller.tracePanelText();
        el("error").textContent = state.error ?? "";
        el("status").textContent = state.schema
            ? `cells ${state.schema.cellCount}, flagged ${state.schema.flaggedCellCount}, ` +
              `destroyed ${state.schema.destroyedCellCount}${state.busy ? " — working…" : ""}`
            : "no cube loaded";
        el<HTMLButtonElement>("apply-btn").disabled =
            state.busy || !state.sessionId || (opKind.value === "dice" && !toDocument(conditionRoot));
        renderHistory();
    }

    controller.onChange(() => {
        renderPivotControls();
        render();
    });
    controller.onChange((state) => {
        if (state.schema && opKind.dataset.rendered !== "yes") {
            opKind.dataset.rendered = "yes";
            renderOpForm();
        }
    });
    render();
}
