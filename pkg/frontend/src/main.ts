// App entry point: wires the select -> attempt -> feedback -> rate loop.

import { ApiClient, flattenWords, type FeedbackCard, type Sentence, type WordReport } from "./api.js";
import { Recorder } from "./audio.js";
import {
  el,
  renderAttemptSummary,
  renderError,
  renderFeedbackCard,
  renderScorePicker,
  renderSentenceList,
  renderStats,
  renderWordRow,
} from "./render.js";
import {
  beginAttempt,
  completeAttempt,
  failAttempt,
  initialState,
  selectSentence,
  tapPhoneme,
  undoTap,
  type PracticeState,
} from "./state.js";

const api = new ApiClient("");
let state: PracticeState = initialState();
let recorder: Recorder | null = null;

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function boot(): Promise<void> {
  try {
    state = { ...state, sentences: await api.sentences() };
  } catch (error) {
    $("sentences").replaceChildren(renderError(String(error), () => void boot()));
    return;
  }
  $("sentences").replaceChildren(
    renderSentenceList(state.sentences, (sentence) => {
      state = selectSentence(state, sentence);
      showSentence(sentence);
    }),
  );
  await refreshStats();
}

function showSentence(sentence: Sentence): void {
  $("practice").hidden = false;
  $("sentence-title").textContent = sentence.text;
  $("report").replaceChildren();
  $("feedback").replaceChildren();
  renderTapPad(sentence);
}

// Tap-to-build phoneme input: the full loop works without any recognizer.
function renderTapPad(sentence: Sentence): void {
  const pad = $("tap-pad");
  pad.replaceChildren();
  const unique = [...new Set(sentence.words.flat())].sort();
  for (const symbol of [...unique, "|"]) {
    const key = el("button", "tap-key", symbol);
    key.addEventListener("click", () => {
      state = tapPhoneme(state, symbol);
      $("tapped").textContent = state.tappedPhonemes.join(" ");
    });
    pad.append(key);
  }
  const undo = el("button", "tap-undo", "undo");
  undo.addEventListener("click", () => {
    state = undoTap(state);
    $("tapped").textContent = state.tappedPhonemes.join(" ");
  });
  const fill = el("button", "tap-fill", "fill canonical");
  fill.addEventListener("click", () => {
    state = { ...state, tappedPhonemes: flattenWords(sentence.words) };
    $("tapped").textContent = state.tappedPhonemes.join(" ");
  });
  pad.append(undo, fill);
  $("tapped").textContent = "";
}

async function submitPhonemeAttempt(): Promise<void> {
  if (!state.selected || state.attemptInFlight) return;
  const sentence = state.selected;
  state = beginAttempt(state);
  try {
    const record = await api.attemptWithPhonemes(
      state.sessionId,
      sentence.sentence_id,
      state.tappedPhonemes,
    );
    state = completeAttempt(state, record);
    showReport(sentence, record.words);
    $("report").prepend(renderAttemptSummary(record));
  } catch (error) {
    state = failAttempt(state);
    $("report").replaceChildren(renderError(String(error), () => void submitPhonemeAttempt()));
  }
}

async function toggleRecording(): Promise<void> {
  const button = $("record") as HTMLButtonElement;
  if (!recorder) {
    recorder = new Recorder();
    await recorder.start();
    button.textContent = "stop & submit";
    return;
  }
  const audioBase64 = await recorder.stop();
  recorder = null;
  button.textContent = "record";
  if (!state.selected || state.attemptInFlight) return;
  const sentence = state.selected;
  state = beginAttempt(state);
  try {
    const record = await api.attemptWithAudio(state.sessionId, sentence.sentence_id, audioBase64);
    state = completeAttempt(state, record);
    showReport(sentence, record.words);
    $("report").prepend(renderAttemptSummary(record));
  } catch (error) {
    state = failAttempt(state);
    $("report").replaceChildren(renderError(String(error), () => void toggleRecording()));
  }
}

function showReport(sentence: Sentence, words: WordReport[]): void {
  $("report").replaceChildren(
    renderWordRow(sentence, words, (report) => void showFeedbackFor(report)),
  );
}

async function showFeedbackFor(report: WordReport): Promise<void> {
  const attempt = state.attempt;
  if (!attempt) return;
  const cards = attempt.feedback.filter((card) => card.word_index === report.word_index);
  const container = $("feedback");
  container.replaceChildren();
  for (const card of cards) {
    container.append(await feedbackCardWithDiagram(card));
  }
}

async function feedbackCardWithDiagram(card: FeedbackCard): Promise<HTMLElement> {
  let svg: string | null = null;
  if (card.diagram_refs.length > 0) {
    try {
      svg = await api.diagramSvg(card.diagram_refs[0]);
    } catch {
      svg = null; // diagram is optional ornamentation; the text still shows
    }
  }
  return renderFeedbackCard(card, svg);
}

async function submitRating(): Promise<void> {
  const phoneme = ($("rating-phoneme") as HTMLInputElement).value.trim();
  if (!phoneme || ratingPre === 0 || ratingPost === 0) return;
  try {
    await api.submitRating(state.sessionId, phoneme, ratingPre, ratingPost);
    $("rating-status").textContent = `stored /${phoneme}/ ${ratingPre} -> ${ratingPost}`;
    await refreshStats();
  } catch (error) {
    $("rating-status").replaceChildren(renderError(String(error), () => void submitRating()));
  }
}

async function refreshStats(): Promise<void> {
  try {
    $("stats").replaceChildren(renderStats(await api.stats()));
  } catch (error) {
    $("stats").replaceChildren(renderError(String(error), () => void refreshStats()));
  }
}

let ratingPre = 0;
let ratingPost = 0;

export function start(): void {
  $("submit-attempt").addEventListener("click", () => void submitPhonemeAttempt());
  $("record").addEventListener("click", () => void toggleRecording());
  $("rating-pre").replaceChildren(renderScorePicker("pre", (v) => (ratingPre = v)));
  $("rating-post").replaceChildren(renderScorePicker("post", (v) => (ratingPost = v)));
  $("submit-rating").addEventListener("click", () => void submitRating());
  void boot();
}

if (typeof document !== "undefined" && document.getElementById("sentences")) {
  start();
}
