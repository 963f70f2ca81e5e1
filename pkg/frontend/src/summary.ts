/**
 * Post-session summary card.
 *
 * The card carries the service's metric report verbatim: `value` keeps
 * the full-precision number (what the cross-check against the CLI
 * compares), `formatted` is only for display.
 */

import type { MetricReport } from "./protocol.js";

export interface SummaryRow {
  key: keyof MetricReport;
  label: string;
  value: number | boolean | string | null;
  formatted: string;
}

export interface SummaryCard {
  title: string;
  empty: boolean;
  rows: SummaryRow[];
}

const ROWS: { key: keyof MetricReport; label: string; digits: number }[] = [
  { key: "completion_time", label: "completion time (s)", digits: 2 },
  { key: "precision_mm", label: "precision (mm)", digits: 2 },
  { key: "plr", label: "path-length ratio", digits: 3 },
  { key: "sparc", label: "smoothness (SPARC)", digits: 1 },
  { key: "sjvi", label: "synergy index", digits: 3 },
  { key: "rom_trunk", label: "trunk ROM (deg)", digits: 1 },
  { key: "rom_elbow", label: "elbow ROM (deg)", digits: 1 },
  { key: "total_trunk", label: "trunk total (deg)", digits: 1 },
  { key: "total_elbow", label: "elbow total (deg)", digits: 1 },
];

export function summaryCard(report: MetricReport | null, title = "session summary"): SummaryCard {
  if (report === null) {
    return { title, empty: true, rows: [{ key: "completed", label: "status", value: null, formatted: "no data" }] };
  }
  const rows: SummaryRow[] = [
    {
      key: "completed",
      label: "status",
      value: report.completed,
      formatted: report.completed ? "completed" : "incomplete",
    },
  ];
  for (const { key, label, digits } of ROWS) {
    const value = report[key];
    if (value === null || value === undefined) continue;
    rows.push({
      key,
      label,
      value,
      formatted: typeof value === "number" ? value.toFixed(digits) : String(value),
    });
  }
  return { title, empty: false, rows };
}
