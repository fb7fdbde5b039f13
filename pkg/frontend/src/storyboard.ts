/**
 * Five-card storyboard draft model: editing, validity, canonical JSON
 * export, and import from a parsed server document.
 */

import type { SceneDoc, StoryboardDoc } from './types';

export const SCENE_COUNT = 5;
export const SCENE_DURATION_S = 12;

export const CARD_HEADINGS = [
  'OPENING SHOT',
  'RISING ACTION',
  'CLIMAX',
  'FALLING ACTION',
  'RESOLUTION',
] as const;

export interface SceneCard {
  heading: string;
  description: string;
  visualPrompt: string;
}

export interface StoryboardDraft {
  cards: SceneCard[];
  /** Set when the last import degraded to the rule-based fallback. */
  importedFromFallback: boolean;
}

export function emptyDraft(): StoryboardDraft {
  return {
    cards: CARD_HEADINGS.map((heading) => ({
      heading,
      description: '',
      visualPrompt: '',
    })),
    importedFromFallback: false,
  };
}

/** A draft is submittable only when every description is non-empty. */
export function draftIsComplete(draft: StoryboardDraft): boolean {
  return (
    draft.cards.length === SCENE_COUNT &&
    draft.cards.every((card) => card.description.trim().length > 0)
  );
}

export function cardValidity(draft: StoryboardDraft): boolean[] {
  return draft.cards.map((card) => card.description.trim().length > 0);
}

/** Serialize to the canonical storyboard JSON the service understands. */
export function draftToJson(draft: StoryboardDraft): string {
  const scenes: SceneDoc[] = draft.cards.map((card, i) => ({
    index: i + 1,
    heading: card.heading,
    description: card.description,
    visual_prompt: card.visualPrompt,
    duration_s: SCENE_DURATION_S,
  }));
  return JSON.stringify({ scenes }, null, 2);
}

/** Populate cards from a parsed document (import or job storyboard view). */
export function draftFromDocument(doc: StoryboardDoc): StoryboardDraft {
  const cards: SceneCard[] = doc.scenes.slice(0, SCENE_COUNT).map((scene) => ({
    heading: scene.heading,
    description: scene.description,
    visualPrompt: scene.visual_prompt,
  }));
  while (cards.length < SCENE_COUNT) {
    cards.push({
      heading: CARD_HEADINGS[cards.length],
      description: '',
      visualPrompt: '',
    });
  }
  return { cards, importedFromFallback: doc.origin === 'fallback' };
}

export function updateCard(
  draft: StoryboardDraft,
  index: number,
  patch: Partial<SceneCard>,
): StoryboardDraft {
  const cards = draft.cards.map((card, i) =>
    i === index ? { ...card, ...patch } : card,
  );
  return { ...draft, cards };
}
