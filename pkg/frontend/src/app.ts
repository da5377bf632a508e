/** DOM rendering for the chat view model. */

import type { DialogueService } from "./client.js";
import { ChatViewModel, type ChatItem } from "./viewmodel.js";

const PHASE_LABELS: Record<string, string> = {
  awaiting_input: "ready",
  eliciting: "gathering facts",
  terminated: "ended",
};

const NOTICE_LABELS: Record<string, string> = {
  NO_MATCH: "Not understood",
  NO_REPLY_POSSIBLE: "No reliable answer",
  CONFLICT_DROPPED: "Set aside (conflicts with earlier statements)",
  TERMINATED: "Session ended",
  CLIENT_ERROR: "Request refused",
};

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  testId?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (testId) node.dataset["testid"] = testId;
  return node;
}

function renderItem(doc: Document, item: ChatItem): HTMLElement {
  if (item.sort === "bubble") {
    const bubble = el(doc, "li", `bubble ${item.author}`, "message");
    bubble.dataset["kind"] = item.kind;
    bubble.dataset["author"] = item.author;
    bubble.textContent = item.text;
    return bubble;
  }
  if (item.sort === "explanation") {
    const card = el(doc, "li", "explanation-card", "explanation-card");
    const becauseTitle = el(doc, "h3");
    becauseTitle.textContent = "Because you told me";
    card.appendChild(becauseTitle);
    const becauseList = el(doc, "ul", "because", "because-facts");
    for (const fact of item.because) {
      const entry = el(doc, "li");
      entry.textContent = fact;
      becauseList.appendChild(entry);
    }
    card.appendChild(becauseList);
    if (item.notGiven.length > 0) {
      const notGivenTitle = el(doc, "h3");
      notGivenTitle.textContent = "Not given";
      card.appendChild(notGivenTitle);
      const notGivenList = el(doc, "ul", "not-given", "not-given");
      for (const record of item.notGiven) {
        const entry = el(doc, "li");
        const reply = el(doc, "span", "withheld-reply");
        reply.textContent = record.replyText;
        entry.appendChild(reply);
        const because = el(doc, "span", "withheld-reason");
        because.textContent =
          record.attackerFacts.length > 0
            ? ` ruled out by: ${record.attackerFacts.join("; ")}`
            : " not fully defended by the stated facts";
        entry.appendChild(because);
        notGivenList.appendChild(entry);
      }
      card.appendChild(notGivenList);
    }
    return card;
  }
  const notice = el(doc, "li", "notice", "notice");
  notice.dataset["kind"] = item.kind;
  const label = NOTICE_LABELS[item.kind] ?? item.kind;
  notice.textContent = item.text === "" ? label : `${label}: ${item.text}`;
  return notice;
}

export interface ChatApp {
  vm: ChatViewModel;
  root: HTMLElement;
}

export function mountChatApp(root: HTMLElement, client: DialogueService): ChatApp {
  const doc = root.ownerDocument;
  const vm = new ChatViewModel(client);

  const header = el(doc, "header", "chat-header");
  const title = el(doc, "h1", undefined, "title");
  title.textContent = "Dialogue";
  const phaseBadge = el(doc, "span", "phase-badge", "phase-badge");
  header.append(title, phaseBadge);

  const layout = el(doc, "div", "layout");
  const conversation = el(doc, "section", "conversation");
  const messages = el(doc, "ol", "messages", "messages");

  const retryBanner = el(doc, "div", "banner retry-banner", "retry-banner");
  const retryLabel = el(doc, "span");
  retryLabel.textContent = "Could not reach the service. Your message was not sent.";
  const retryButton = el(doc, "button", undefined, "retry-button");
  retryButton.type = "button";
  retryButton.textContent = "Retry";
  retryBanner.append(retryLabel, retryButton);

  const endedBanner = el(doc, "div", "banner ended-banner", "ended-banner");
  endedBanner.textContent = "This session has ended. Reload to start a new one.";

  const startBanner = el(doc, "div", "banner start-banner", "start-banner");
  const startLabel = el(doc, "span");
  startLabel.textContent = "Could not reach the service.";
  const startRetryButton = el(doc, "button", undefined, "start-retry-button");
  startRetryButton.type = "button";
  startRetryButton.textContent = "Try again";
  startBanner.append(startLabel, startRetryButton);

  const composer = el(doc, "form", "composer", "composer");
  const input = el(doc, "input", undefined, "composer-input");
  input.type = "text";
  input.placeholder = "Tell me about your situation";
  const sendButton = el(doc, "button", undefined, "send-button");
  sendButton.type = "submit";
  sendButton.textContent = "Send";
  const whyButton = el(doc, "button", undefined, "why-button");
  whyButton.type = "button";
  whyButton.textContent = "Why?";
  const endButton = el(doc, "button", undefined, "end-button");
  endButton.type = "button";
  endButton.textContent = "End session";
  composer.append(input, sendButton, whyButton, endButton);

  conversation.append(messages, retryBanner, endedBanner, startBanner, composer);

  const panel = el(doc, "aside", "facts-panel");
  const panelTitle = el(doc, "h2");
  panelTitle.textContent = "Facts on record";
  const factsList = el(doc, "ul", "facts", "facts-panel");
  panel.append(panelTitle, factsList);

  layout.append(conversation, panel);
  root.append(header, layout);

  client
    .health()
    .then((health) => {
      if (health.kb_title) title.textContent = health.kb_title;
    })
    .catch(() => {
      /* title stays generic when health is unreachable */
    });

  const render = () => {
    messages.replaceChildren(
      ...vm.items.map((item) => renderItem(doc, item)),
    );
    // Highlight the open question while the engine is gathering facts.
    const prompts = messages.querySelectorAll('[data-kind="PROMPT"]');
    prompts.forEach((node) => node.classList.remove("pending"));
    if (vm.phase === "eliciting" && prompts.length > 0) {
      prompts[prompts.length - 1]!.classList.add("pending");
    }

    phaseBadge.textContent = PHASE_LABELS[vm.phase] ?? vm.phase;
    phaseBadge.dataset["phase"] = vm.phase;

    factsList.replaceChildren(
      ...vm.activated.map((factId) => {
        const entry = el(doc, "li");
        entry.textContent = factId;
        return entry;
      }),
    );

    retryBanner.hidden = vm.retryText === null;
    endedBanner.hidden = !vm.endedBannerVisible;
    startBanner.hidden = !vm.startFailed;

    const composerEnabled = vm.canSend;
    input.disabled = !composerEnabled;
    sendButton.disabled = !composerEnabled;
    whyButton.disabled = !(composerEnabled && vm.whyAvailable);
    endButton.disabled = !composerEnabled;

    if (messages.lastElementChild) {
      messages.lastElementChild.scrollIntoView?.({ block: "end" });
    }
  };

  vm.subscribe(render);

  composer.addEventListener("submit", (submitEvent) => {
    submitEvent.preventDefault();
    const text = input.value;
    void vm.sendUtterance(text).then((accepted) => {
      if (accepted) input.value = "";
      // A failed send keeps the composer text for the retry.
    });
  });
  retryButton.addEventListener("click", () => {
    void vm.retry().then((accepted) => {
      if (accepted) input.value = "";
    });
  });
  startRetryButton.addEventListener("click", () => {
    void vm.start();
  });
  whyButton.addEventListener("click", () => {
    void vm.requestExplanation();
  });
  endButton.addEventListener("click", () => {
    void vm.endSession();
  });

  render();
  void vm.start();
  return { vm, root };
}
