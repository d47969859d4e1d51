/**
 * Chat column: transcript bubbles and the input row.
 *
 * Submitting whitespace is rejected locally; no request leaves the page.
 */

export interface ChatEntry {
  role: "user" | "bot" | "info";
  text: string;
}

export class ChatPanel {
  private readonly log: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly send: HTMLButtonElement;
  private readonly entries: ChatEntry[] = [];

  constructor(
    root: HTMLElement,
    private readonly onSubmit: (text: string) => void,
  ) {
    const doc = root.ownerDocument;
    this.log = doc.createElement("div");
    this.log.className = "chat-log";
    const form = doc.createElement("form");
    form.className = "chat-input";
    this.input = doc.createElement("input");
    this.input.type = "text";
    this.input.placeholder = "say something";
    this.input.setAttribute("aria-label", "message");
    this.send = doc.createElement("button");
    this.send.type = "submit";
    this.send.textContent = "Send";
    form.appendChild(this.input);
    form.appendChild(this.send);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.submit();
    });
    root.appendChild(this.log);
    root.appendChild(form);
  }

  private submit(): void {
    const text = this.input.value.trim();
    if (!text) {
      this.input.classList.add("invalid");
      setTimeout(() => this.input.classList.remove("invalid"), 400);
      return;
    }
    this.input.value = "";
    this.onSubmit(text);
  }

  private add(role: ChatEntry["role"], text: string): void {
    this.entries.push({ role, text });
    const doc = this.log.ownerDocument;
    const bubble = doc.createElement("div");
    bubble.className = `bubble bubble-${role}`;
    bubble.textContent = text;
    this.log.appendChild(bubble);
    this.log.scrollTop = this.log.scrollHeight;
  }

  addUser(text: string): void {
    this.add("user", text);
  }

  addBot(text: string): void {
    this.add("bot", text || "…");
  }

  addInfo(text: string): void {
    this.add("info", text);
  }

  setBusy(busy: boolean): void {
    this.input.disabled = busy;
    this.send.disabled = busy;
  }

  clear(): void {
    this.entries.length = 0;
    this.log.textContent = "";
  }

  transcript(): ChatEntry[] {
    return [...this.entries];
  }
}
