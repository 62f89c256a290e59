package com.shop.core;

import com.shop.model.Customer;
import com.shop.model.CustomerRecord;
import com.shop.model.Order;
import com.shop.util.Log;

public class OrderProcessor {
    private int processed;
    private int failed;
    private String lastOutcome;

    public void process(Order order, CustomerRecord record) {
        if (order.isEmpty()) {
            Log.warn("empty order");
            failed = failed + 1;
            return;
        }
        if (record.getEmail() == null) {
            failed = failed + 1;
            return;
        }
        processed = processed + 1;
        lastOutcome = "ok";
    }

    public boolean validate(Order order) {
        Customer customer = order.getCustomer();
        if (customer == null) {
            return false;
        }
        if (!customer.hasEmail()) {
            return false;
        }
        return order.getTotalCents() > 0;
    }

    public long priceOf(Order order) {
        long cents = order.getTotalCents();
        if (cents < 0) {
            return 0;
        }
        return cents;
    }

    public void restock(Inventory inventory, Order order) {
        if (order.isEmpty()) {
            return;
        }
        inventory.adjust(1);
        Log.info("restocked");
    }

    public void remind(Customer customer) {
        if (customer.getEmail() == null) {
            Log.warn("no email");
            return;
        }
        Log.info("reminded");
    }

    public void tag(CustomerRecord record) {
        if (record.loyaltyPoints > 100) {
            record.tier = "gold";
        } else {
            record.tier = "basic";
        }
    }

    public String summarize() {
        return processed + "/" + failed + " " + lastOutcome;
    }

    public void reset() {
        processed = 0;
        failed = 0;
        lastOutcome = "";
    }
}
