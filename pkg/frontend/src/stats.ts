/**
 * Parsing and per-checkpoint statistics for osmdkit trace CSVs.
 *
 * The CSV contract: header `run_id,t,cum_regret`, one row per (run,
 * checkpoint).  Statistics are the mean and the sample standard deviation
 * (ddof = 1, zero for a single run) across runs at each checkpoint, matching
 * the runner's own summary JSON.
 */
import Papa from "papaparse";

export interface TraceRow {
  runId: number;
  t: number;
  cumRegret: number;
}

export interface CheckpointStat {
  t: number;
  mean: number;
  std: number;
  runs: number;
}

export class TraceFormatError extends Error {}

const HEADER = ["run_id", "t", "cum_regret"];

export function parseTraceCsv(text: string): TraceRow[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new TraceFormatError(`CSV parse failed: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0 || rows[0].join(",") !== HEADER.join(",")) {
    throw new TraceFormatError(
      `expected header '${HEADER.join(",")}', got '${(rows[0] ?? []).join(",")}'`,
    );
  }
  return rows.slice(1).map((cells, i) => {
    if (cells.length !== 3) {
      throw new TraceFormatError(`row ${i + 2}: expected 3 fields, got ${cells.length}`);
    }
    const [runId, t, cumRegret] = cells.map(Number);
    if (!Number.isInteger(runId) || !Number.isInteger(t) || !Number.isFinite(cumRegret)) {
      throw new TraceFormatError(`row ${i + 2}: malformed values '${cells.join(",")}'`);
    }
    return { runId, t, cumRegret };
  });
}

export function checkpointStats(rows: TraceRow[]): CheckpointStat[] {
  const byT = new Map<number, number[]>();
  for (const row of rows) {
    const bucket = byT.get(row.t);
    if (bucket) bucket.push(row.cumRegret);
    else byT.set(row.t, [row.cumRegret]);
  }
  const ts = [...byT.keys()].sort((a, b) => a - b);
  const counts = new Set(ts.map((t) => byT.get(t)!.length));
  if (counts.size > 1) {
    throw new TraceFormatError(
      `uneven checkpoint grid: run counts per checkpoint are {${[...counts].join(", ")}}`,
    );
  }
  return ts.map((t) => {
    const vals = byT.get(t)!;
    const mean = vals.reduce((a, b) => a + b, 0) / vals.length;
    let std = 0;
    if (vals.length > 1) {
      const ss = vals.reduce((a, b) => a + (b - mean) * (b - mean), 0);
      std = Math.sqrt(ss / (vals.length - 1));
    }
    return { t, mean, std, runs: vals.length };
  });
}

/** Assert that every series shares the same checkpoint grid. */
export function sharedGrid(series: CheckpointStat[][]): number[] {
  const grids = series.map((s) => s.map((c) => c.t).join(","));
  if (new Set(grids).size > 1) {
    throw new TraceFormatError("input CSVs do not share the checkpoint grid");
  }
  return series[0].map((c) => c.t);
}
