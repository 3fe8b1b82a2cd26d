// Client-side form validation. The bounds mirror the server's request
// schema exactly; anything rejected here would come back as a 400 anyway,
// so the console can refuse to send without losing expressiveness.

import type { FieldError } from "./types.js";

export const BOUNDS = {
  length: { min: 2, max: 11 },
  count: { min: 1, max: 1000 },
} as const;

export const DEFAULTS = { length: 6, count: 20 } as const;

function checkRange(
  field: "length" | "count",
  raw: string,
  errors: FieldError[],
): number | null {
  const value = Number(raw);
  if (!Number.isInteger(value)) {
    errors.push({ field, message: `${field} must be an integer` });
    return null;
  }
  const { min, max } = BOUNDS[field];
  if (value < min || value > max) {
    errors.push({ field, message: `${field} must be between ${min} and ${max}` });
    return null;
  }
  return value;
}

export interface ConsoleForm {
  length: string;
  count: string;
  l1Model: string;
  seed: string;
}

export interface ValidatedForm {
  length: number;
  count: number;
  l1_model: string | null;
  seed: number | null;
}

export function validateConsoleForm(
  form: ConsoleForm,
): { ok: true; value: ValidatedForm } | { ok: false; errors: FieldError[] } {
  const errors: FieldError[] = [];
  const length = checkRange("length", form.length, errors);
  const count = checkRange("count", form.count, errors);
  let seed: number | null = null;
  if (form.seed.trim() !== "") {
    const parsed = Number(form.seed);
    if (!Number.isInteger(parsed) || parsed < 0) {
      errors.push({ field: "seed", message: "seed must be a non-negative integer" });
    } else {
      seed = parsed;
    }
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  return {
    ok: true,
    value: {
      length: length as number,
      count: count as number,
      l1_model: form.l1Model.trim() === "" ? null : form.l1Model.trim(),
      seed,
    },
  };
}
