package com.shop.core;

public class Inventory {
    private int stock;

    public int getStock() {
        return stock;
    }

    public void adjust(int delta) {
        stock = stock + delta;
    }

    public void take(int count) {
        stock = stock - count;
    }

    public boolean available(int wanted) {
        return stock >= wanted;
    }
}
