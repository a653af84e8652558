export class Cart {
  #items = [];

  add(item) {
    this.#items.push(item);
    renderCart(this.#items);
  }

  total() {
    return this.#items.reduce((s, i) => s + i.price, 0);
  }
}

export function renderCart(items) {
  const list = document.getElementById("cart");
  list.innerHTML = items.map((i) => i.name).join("");
}
