// Practice session state. One in-flight attempt at a time; history appends
// locally so the learner can review earlier tries within the session.

import type { AttemptRecord, Sentence } from "./api.js";

export interface PracticeState {
  sessionId: string;
  sentences: Sentence[];
  selected: Sentence | null;
  tappedPhonemes: string[];
  attempt: AttemptRecord | null;
  attemptInFlight: boolean;
  history: AttemptRecord[];
}

export function newSessionId(): string {
  const alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  let id = "s-";
  for (let i = 0; i < 12; i++) {
    id += alphabet[Math.floor(Math.random() * alphabet.length)];
  }
  return id;
}

export function initialState(): PracticeState {
  return {
    sessionId: newSessionId(),
    sentences: [],
    selected: null,
    tappedPhonemes: [],
    attempt: null,
    attemptInFlight: false,
    history: [],
  };
}

export function selectSentence(state: PracticeState, sentence: Sentence): PracticeState {
  return { ...state, selected: sentence, tappedPhonemes: [], attempt: null };
}

export function tapPhoneme(state: PracticeState, symbol: string): PracticeState {
  return { ...state, tappedPhonemes: [...state.tappedPhonemes, symbol] };
}

export function undoTap(state: PracticeState): PracticeState {
  return { ...state, tappedPhonemes: state.tappedPhonemes.slice(0, -1) };
}

export function beginAttempt(state: PracticeState): PracticeState {
  if (state.attemptInFlight) throw new Error("an attempt is already in flight");
  return { ...state, attemptInFlight: true };
}

export function completeAttempt(state: PracticeState, record: AttemptRecord): PracticeState {
  return {
    ...state,
    attempt: record,
    attemptInFlight: false,
    history: [...state.history, record],
  };
}

export function failAttempt(state: PracticeState): PracticeState {
  return { ...state, attemptInFlight: false };
}
