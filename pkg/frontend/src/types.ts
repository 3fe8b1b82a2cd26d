// Wire types for the /api/v1 endpoints.

export interface GenerateRequest {
  length: number;
  count: number;
  l1_model?: string | null;
  seed?: number | null;
}

export interface RankedWord {
  text: string;
  score: number;
  rank: number;
}

export interface FilterReport {
  input_count: number;
  removed_lexicon: number;
  removed_exclusion: number;
  removed_low_probability: number;
  unscorable: number;
  output_count: number;
}

export interface GenerateResponse {
  seed: number;
  model: string;
  l1_model: string | null;
  words: RankedWord[];
  filter_report: FilterReport;
}

export interface StudyItem {
  text: string;
  group: string;
  block: number | null;
}

export interface StudyDoc {
  id: string;
  design: string;
  seed: number | null;
  items: StudyItem[];
}

export type Response = "ACCEPT" | "REJECT";
export type Proficiency = "B" | "I" | "A";

export interface TrialRecord {
  rater_id: string;
  l1: string;
  proficiency: Proficiency;
  word: string;
  group: string;
  response: Response;
  rt_seconds: number;
}

export interface FieldError {
  field: string;
  message: string;
}
