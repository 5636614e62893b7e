// Typed client for the practice service JSON API. The UI performs no
// analysis of its own: everything rendered comes from these payloads.

export interface Sentence {
  sentence_id: string;
  text: string;
  difficulty: string;
  words: string[][];
}

export interface ContrastPoint {
  feature: string;
  expected_value: string;
  produced_value: string;
  instruction: string;
}

export interface FeedbackCard {
  expected: string;
  produced: string | null;
  headline: string;
  contrast_points: ContrastPoint[];
  guidance: string[];
  diagram_refs: string[];
  word_index: number;
}

export interface WordReport {
  word_index: number;
  mispronounced: boolean;
  severity: number;
  severity_bin: "none" | "minor" | "moderate" | "severe";
  expected_phonemes: string[];
  phoneme_pairs: { expected: string | null; produced: string | null }[];
}

export interface AttemptRecord {
  type: string;
  session_id: string;
  sentence_id: string;
  input_kind: "phonemes" | "audio";
  created_at: string;
  words: WordReport[];
  feedback: FeedbackCard[];
  summary: {
    n_words: number;
    n_flagged: number;
    flagged_words: number[];
    predicted_phonemes: string[][];
  };
}

export interface StatsPayload {
  n_ratings: number;
  wilcoxon: {
    w_statistic: number;
    n_nonzero: number;
    p_value: number;
    method: string;
    degenerate: boolean;
  } | null;
  likert: {
    per_phoneme: Record<
      string,
      { pre: LikertGroup; post: LikertGroup; delta_mean: number }
    >;
    overall?: { pre: LikertGroup; post: LikertGroup };
  } | null;
}

export interface LikertGroup {
  n: number;
  mean: number;
  sd: number;
  formatted: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
    else if (body.detail) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  async sentences(): Promise<Sentence[]> {
    const payload = await this.getJson<{ sentences: Sentence[] }>("/api/sentences");
    return payload.sentences;
  }

  attemptWithPhonemes(
    sessionId: string,
    sentenceId: string,
    phonemes: string[],
  ): Promise<AttemptRecord> {
    return this.postJson<AttemptRecord>("/api/attempts", {
      session_id: sessionId,
      sentence_id: sentenceId,
      phonemes,
    });
  }

  attemptWithAudio(
    sessionId: string,
    sentenceId: string,
    audioBase64: string,
  ): Promise<AttemptRecord> {
    return this.postJson<AttemptRecord>("/api/attempts", {
      session_id: sessionId,
      sentence_id: sentenceId,
      audio: audioBase64,
    });
  }

  async diagramSvg(ref: string): Promise<string> {
    const response = await fetch(this.baseUrl + ref);
    if (!response.ok) await parseError(response);
    return await response.text();
  }

  submitRating(
    sessionId: string,
    phoneme: string,
    pre: number,
    post: number,
  ): Promise<{ status: string }> {
    return this.postJson<{ status: string }>("/api/ratings", {
      session_id: sessionId,
      phoneme,
      pre,
      post,
    });
  }

  stats(): Promise<StatsPayload> {
    return this.getJson<StatsPayload>("/api/stats");
  }
}

// Phoneme-tap input produces a flat symbol list with "|" between words,
// matching the wire format of the attempts endpoint.
export function flattenWords(words: string[][]): string[] {
  const out: string[] = [];
  words.forEach((word, i) => {
    if (i > 0) out.push("|");
    out.push(...word);
  });
  return out;
}
