/** Single-page studio: submission form on the left, live job view on the right. */

import { ApiError, createJob, frameUrl, keyframeNumbers, parseStoryboard, videoUrl } from './api';
import { JobPoller } from './poller';
import {
  DEFAULT_FORM,
  MOODS,
  QUALITIES,
  RESOLUTIONS,
  assembleJob,
  switchMode,
  switchNeedsConfirmation,
  validateForm,
} from './form';
import {
  cardValidity,
  draftFromDocument,
  draftIsComplete,
  draftToJson,
  emptyDraft,
  updateCard,
  type StoryboardDraft,
} from './storyboard';
import type { FormState, JobSnapshot, RenderMode } from './types';
import './style.css';

const STAGE_LABELS: Record<string, string> = {
  queued: 'Waiting in queue',
  storyboard: 'Writing the storyboard',
  keyframes: 'Generating keyframes',
  interpolating: 'Interpolating frames',
  audio: 'Mixing audio',
  compositing: 'Encoding video',
  done: 'Finished',
  failed: 'Failed',
};

let form: FormState = { ...DEFAULT_FORM };
let draft: StoryboardDraft = emptyDraft();
let poller: JobPoller | null = null;

const root = document.querySelector<HTMLDivElement>('#app');
if (!root) throw new Error('missing #app mount point');

root.innerHTML = `
  <header>
    <h1>cineforge studio</h1>
    <p class="tagline">One prompt, one minute of video.</p>
  </header>
  <main>
    <section class="panel" id="form-panel">
      <nav class="mode-tabs" role="tablist">
        <button type="button" data-mode="simple" class="active">Simple</button>
        <button type="button" data-mode="advanced">Advanced</button>
      </nav>
      <form id="job-form" novalidate>
        <label for="prompt">Prompt</label>
        <textarea id="prompt" rows="2" placeholder="A lone astronaut drifting toward a silent station"></textarea>
        <p class="field-error" data-error-for="prompt"></p>

        <div id="advanced-fields" hidden>
          <div class="grid">
            <label>Resolution
              <select id="resolution"></select>
            </label>
            <label>FPS
              <input id="fps" type="number" min="15" max="30" step="1" />
            </label>
            <label>Quality
              <select id="quality"></select>
            </label>
            <label>Mood
              <select id="mood"></select>
            </label>
            <label>Seed
              <input id="seed" type="text" placeholder="random" />
            </label>
          </div>
          <p class="field-error" data-error-for="fps"></p>
          <p class="field-error" data-error-for="seedBase"></p>

          <fieldset id="storyboard-editor">
            <legend>Storyboard</legend>
            <div id="cards"></div>
            <p class="field-error" data-error-for="storyboard"></p>
            <div class="editor-actions">
              <textarea id="paste-area" rows="3"
                placeholder="Paste storyboard text or JSON, then Import"></textarea>
              <div class="row">
                <button type="button" id="import-btn">Import</button>
                <button type="button" id="export-btn">Export JSON</button>
              </div>
              <p id="import-warning" class="warning" hidden></p>
              <pre id="export-out" hidden></pre>
            </div>
          </fieldset>

          <div class="grid">
            <label>Voiceover audio
              <input id="voiceover" type="file" accept="audio/*" />
            </label>
            <label>Music audio
              <input id="music" type="file" accept="audio/*" />
            </label>
          </div>
        </div>

        <button type="submit" id="submit-btn">Render</button>
        <p class="field-error" data-error-for="_global"></p>
      </form>
    </section>

    <section class="panel" id="job-panel" hidden>
      <h2>Job <span id="job-id"></span></h2>
      <p id="stage-label"></p>
      <div class="progress-track"><div id="progress-bar"></div></div>
      <div id="fallback-banners"></div>
      <div id="result"></div>
    </section>
  </main>
`;

function el<T extends HTMLElement>(selector: string): T {
  const node = root!.querySelector<T>(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node;
}

function fillSelect(select: HTMLSelectElement, options: readonly string[], value: string): void {
  select.innerHTML = '';
  for (const option of options) {
    const node = document.createElement('option');
    node.value = option;
    node.textContent = option;
    select.appendChild(node);
  }
  select.value = value;
}

fillSelect(el<HTMLSelectElement>('#resolution'), RESOLUTIONS, form.resolution);
fillSelect(el<HTMLSelectElement>('#quality'), QUALITIES, form.quality);
fillSelect(el<HTMLSelectElement>('#mood'), MOODS, form.mood);
el<HTMLInputElement>('#fps').value = String(form.fps);

function renderCards(): void {
  const container = el<HTMLDivElement>('#cards');
  const validity = cardValidity(draft);
  container.innerHTML = '';
  draft.cards.forEach((card, i) => {
    const box = document.createElement('div');
    box.className = validity[i] ? 'card' : 'card invalid';
    box.innerHTML = `
      <h3>${i + 1}. ${card.heading}</h3>
      <textarea data-card="${i}" data-field="description" rows="2"
        placeholder="What happens in this scene">${card.description}</textarea>
      <input data-card="${i}" data-field="visualPrompt" type="text"
        placeholder="Visual prompt (optional)" value="${card.visualPrompt.replace(/"/g, '&quot;')}" />
    `;
    container.appendChild(box);
  });
}

renderCards();

function draftHasContent(): boolean {
  return draft.cards.some((c) => c.description.trim() || c.visualPrompt.trim());
}

/** A started storyboard must be finished before the form can be sent. */
function refreshSubmitState(): void {
  el<HTMLButtonElement>('#submit-btn').disabled =
    form.mode === 'advanced' && draftHasContent() && !draftIsComplete(draft);
}

function readFormState(): void {
  form.prompt = el<HTMLTextAreaElement>('#prompt').value;
  form.resolution = el<HTMLSelectElement>('#resolution').value;
  form.fps = Number(el<HTMLInputElement>('#fps').value);
  form.quality = el<HTMLSelectElement>('#quality').value;
  form.mood = el<HTMLSelectElement>('#mood').value;
  form.seedBase = el<HTMLInputElement>('#seed').value;
  form.customStoryboard = el<HTMLTextAreaElement>('#paste-area').value;
  form.voiceoverFile = el<HTMLInputElement>('#voiceover').files?.[0] ?? null;
  form.musicFile = el<HTMLInputElement>('#music').files?.[0] ?? null;
}

function showErrors(errors: Record<string, string | undefined>): void {
  root!.querySelectorAll<HTMLParagraphElement>('.field-error').forEach((node) => {
    const field = node.dataset.errorFor!;
    node.textContent = errors[field] ?? '';
  });
}

function setMode(mode: RenderMode): void {
  if (switchNeedsConfirmation(form, mode)) {
    const ok = window.confirm(
      'Switching to Simple mode discards the storyboard and uploads. Continue?',
    );
    if (!ok) return;
  }
  form = switchMode(form, mode);
  if (mode === 'simple') {
    el<HTMLTextAreaElement>('#paste-area').value = '';
    el<HTMLInputElement>('#voiceover').value = '';
    el<HTMLInputElement>('#music').value = '';
  }
  el<HTMLDivElement>('#advanced-fields').hidden = mode !== 'advanced';
  root!.querySelectorAll<HTMLButtonElement>('.mode-tabs button').forEach((btn) => {
    btn.classList.toggle('active', btn.dataset.mode === mode);
  });
  refreshSubmitState();
}

root.querySelectorAll<HTMLButtonElement>('.mode-tabs button').forEach((btn) => {
  btn.addEventListener('click', () => setMode(btn.dataset.mode as RenderMode));
});

el<HTMLDivElement>('#cards').addEventListener('input', (event) => {
  const target = event.target as HTMLElement;
  const index = Number(target.dataset.card);
  const field = target.dataset.field;
  if (Number.isNaN(index) || !field) return;
  const value = (target as HTMLInputElement | HTMLTextAreaElement).value;
  draft = updateCard(draft, index, { [field]: value });
  // keep focus: only refresh validity classes, not the whole card list
  const validity = cardValidity(draft);
  root!.querySelectorAll<HTMLDivElement>('#cards .card').forEach((card, i) => {
    card.classList.toggle('invalid', !validity[i]);
  });
  refreshSubmitState();
});

el<HTMLButtonElement>('#import-btn').addEventListener('click', async () => {
  readFormState();
  const warning = el<HTMLParagraphElement>('#import-warning');
  warning.hidden = true;
  if (!form.customStoryboard.trim()) return;
  try {
    const doc = await parseStoryboard(form.customStoryboard, form.prompt || 'untitled scene');
    draft = draftFromDocument(doc);
    renderCards();
    refreshSubmitState();
    if (draft.importedFromFallback) {
      warning.textContent =
        'That text could not be parsed as five scenes - a rule-based fallback storyboard would be used. Edit the cards before submitting.';
      warning.hidden = false;
    }
  } catch (err) {
    warning.textContent = err instanceof Error ? err.message : 'Import failed.';
    warning.hidden = false;
  }
});

el<HTMLButtonElement>('#export-btn').addEventListener('click', () => {
  const out = el<HTMLPreElement>('#export-out');
  out.textContent = draftToJson(draft);
  out.hidden = false;
});

function renderFallbacks(snapshot: JobSnapshot): void {
  const container = el<HTMLDivElement>('#fallback-banners');
  container.innerHTML = '';
  for (const notice of snapshot.fallbacks) {
    const banner = document.createElement('p');
    banner.className = 'fallback-banner';
    banner.textContent = `${notice.stage}: ${notice.reason}`;
    container.appendChild(banner);
  }
}

function renderResult(snapshot: JobSnapshot): void {
  const container = el<HTMLDivElement>('#result');
  container.innerHTML = '';
  if (snapshot.state === 'failed') {
    const msg = document.createElement('p');
    msg.className = 'error';
    msg.textContent = `Render failed: ${snapshot.error ?? 'unknown error'}`;
    container.appendChild(msg);
    return;
  }
  if (snapshot.state !== 'done' || !snapshot.artifacts) return;

  if (snapshot.artifacts.video_available) {
    const video = document.createElement('video');
    video.controls = true;
    video.src = videoUrl(snapshot.id);
    container.appendChild(video);
  } else {
    const msg = document.createElement('p');
    msg.className = 'warning';
    msg.textContent =
      'No encoder was available, so there is no MP4; the rendered frames and audio were kept.';
    container.appendChild(msg);
  }

  const strip = document.createElement('div');
  strip.className = 'thumb-strip';
  for (const n of keyframeNumbers(snapshot.artifacts.frame_count)) {
    const img = document.createElement('img');
    img.src = frameUrl(snapshot.id, n);
    img.alt = `frame ${n}`;
    strip.appendChild(img);
  }
  container.appendChild(strip);
}

function watchJob(id: string): void {
  poller?.stop();
  el<HTMLElement>('#job-panel').hidden = false;
  el<HTMLSpanElement>('#job-id').textContent = id;
  poller = new JobPoller(id, {
    onUpdate: (snapshot) => {
      el<HTMLParagraphElement>('#stage-label').textContent =
        STAGE_LABELS[snapshot.state] ?? snapshot.state;
      el<HTMLDivElement>('#progress-bar').style.width =
        `${Math.round(snapshot.progress * 100)}%`;
      renderFallbacks(snapshot);
      renderResult(snapshot);
    },
    onMissing: () => {
      el<HTMLParagraphElement>('#stage-label').textContent = 'Job not found.';
    },
    onRetry: (attempt) => {
      el<HTMLParagraphElement>('#stage-label').textContent =
        `Connection lost, retrying (attempt ${attempt})...`;
    },
  });
  poller.start();
}

el<HTMLFormElement>('#job-form').addEventListener('submit', async (event) => {
  event.preventDefault();
  readFormState();
  const activeDraft = form.mode === 'advanced' && draftHasContent() ? draft : null;
  const errors = validateForm(form, activeDraft);
  showErrors(errors);
  if (Object.keys(errors).length > 0) return;

  const job = assembleJob(form, activeDraft);
  const submit = el<HTMLButtonElement>('#submit-btn');
  submit.disabled = true;
  try {
    const id = await createJob({
      config: job.config,
      voiceover: job.voiceover,
      music: job.music,
    });
    watchJob(id);
  } catch (err) {
    if (err instanceof ApiError && err.detail) {
      showErrors({ [err.detail.field]: err.detail.message, _global: undefined });
    } else {
      showErrors({ _global: err instanceof Error ? err.message : 'Submission failed.' });
    }
  } finally {
    submit.disabled = false;
    refreshSubmitState();
  }
});
