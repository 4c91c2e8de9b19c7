/** Plot specification: which CSVs to draw, labels, and an optional analytic
 * bound curve of the form a·sqrt(t) + c. */
import { z } from "zod";

export const boundSchema = z.object({
  sqrtCoefficient: z.number(),
  constant: z.number().default(0),
  label: z.string().optional(),
});

export const plotSpecSchema = z.object({
  title: z.string().optional(),
  output: z.string(),
  xScale: z.enum(["linear", "log"]).default("linear"),
  series: z
    .array(
      z.object({
        csv: z.string(),
        label: z.string(),
        color: z.string().optional(),
      }),
    )
    .min(1),
  bound: boundSchema.optional(),
});

export type PlotSpec = z.infer<typeof plotSpecSchema>;
export type BoundSpec = z.infer<typeof boundSchema>;

export function boundValue(bound: BoundSpec, t: number): number {
  return bound.sqrtCoefficient * Math.sqrt(t) + bound.constant;
}

export function parsePlotSpec(doc: unknown): PlotSpec {
  const result = plotSpecSchema.safeParse(doc);
  if (!result.success) {
    const msgs = result.error.issues
      .map((i) => `${i.path.join(".") || "<root>"}: ${i.message}`)
      .join("; ");
    throw new Error(`invalid plot spec: ${msgs}`);
  }
  return result.data;
}
